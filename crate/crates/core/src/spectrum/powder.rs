use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// One crystallite orientation: PAS-to-rotor angle and its quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub beta_r: f64,
    pub weight: f64,
}

/// Orientations for averaging over `beta_r`; weights sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PowderGrid {
    orientations: Vec<Orientation>,
}

impl PowderGrid {
    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    /// Weighted sum of `f(beta_r)` in grid order.
    pub fn average(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.orientations
            .iter()
            .map(|o| o.weight * f(o.beta_r))
            .sum()
    }
}

/// Gauss-Legendre nodes in `cos(beta_r)` on `[0, 1]`. With an axially
/// symmetric gradient the other two Euler angles drop out, and `n` nodes
/// integrate polynomials in `cos(beta_r)` up to degree `2n - 1` exactly.
pub fn powder_orientations(n: NonZeroUsize) -> PowderGrid {
    let rule = GaussLegendre::new(n);
    let pairs = rule.as_node_weight_pairs();
    let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
    let orientations = pairs
        .iter()
        .map(|&(x, w)| Orientation {
            beta_r: ((x + 1.0) / 2.0).clamp(0.0, 1.0).acos(),
            weight: w / total,
        })
        .collect();
    PowderGrid { orientations }
}
