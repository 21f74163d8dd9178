//! The `.pp` experiment description: spin system, acquisition grid, the
//! phase-cycled pulse list and the pathway routes to simulate.
//!
//! ```text
//! # comment
//! spin = 5/2
//! larmor_hz = 81312792
//! ...
//! pulse p1 n_phases=4 dp=+1
//! pulse p4 n_phases=1 dp=0 hold
//! acquire order=-1
//! route desired dp=(+1,-1,0,0,-1) t1_branch=ST1 amp=1.0
//! ```
//!
//! The format is line oriented. Header keys may appear in any order; pulses
//! are applied in the order they are listed. Frequencies are plain Hz.
//! `hold` marks a pulse that cannot change the coherence order.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::coherence::{CoherencePathway, CycleSpec, PulseSpec};
use crate::error::Result;
use crate::spin::{Spin, SpinSystem, TransitionLabel};

/// The 1Q-STMAS experiment with pulses 1, 2 and 5 cycled through 4 phases.
pub const STMAS_1Q: &str = include_str!("../programs/stmas_1q.pp");

const HEADER_KEYS: [&str; 9] = [
    "spin",
    "larmor_hz",
    "nuq_hz",
    "spin_rate_hz",
    "sw_f2_hz",
    "sw_f1_hz",
    "td_f2",
    "td_f1",
    "ref_hz",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Acquisition {
    pub sw_f2_hz: f64,
    pub sw_f1_hz: f64,
    pub td_f2: usize,
    pub td_f1: usize,
    pub ref_hz: f64,
    pub spin_rate_hz: f64,
}

impl Acquisition {
    pub fn dwell_f2(&self) -> f64 {
        1.0 / self.sw_f2_hz
    }

    pub fn dwell_f1(&self) -> f64 {
        1.0 / self.sw_f1_hz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub name: String,
    pub dp: Vec<i32>,
    pub t1_branch: TransitionLabel,
    pub amplitude: f64,
}

impl Route {
    pub fn pathway(&self) -> CoherencePathway {
        CoherencePathway {
            dp: self.dp.clone(),
            t1_branch: Some(self.t1_branch),
            amplitude: self.amplitude.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseProgram {
    pub spin: Spin,
    pub larmor_hz: f64,
    pub nuq_hz: f64,
    pub acquisition: Acquisition,
    pub cycle: CycleSpec,
    pub routes: Vec<Route>,
}

impl PulseProgram {
    pub fn system(&self) -> Result<SpinSystem> {
        SpinSystem::new(self.spin, self.larmor_hz, self.nuq_hz)
    }

    pub fn route(&self, name: &str) -> Option<&Route> {
        self.routes.iter().find(|r| r.name == name)
    }

    pub fn shipped() -> PulseProgram {
        parse_program(STMAS_1Q).expect("shipped program parses")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IssueKind {
    Syntax,
    Duplicate,
    Range,
    Missing,
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IssueKind::Syntax => "syntax",
            IssueKind::Duplicate => "duplicate",
            IssueKind::Range => "range",
            IssueKind::Missing => "missing",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIssue {
    /// 1-based.
    pub line: usize,
    pub kind: IssueKind,
    pub message: String,
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.kind, self.message)
    }
}

/// Every issue found in one source text, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIssues(pub Vec<ParseIssue>);

impl fmt::Display for ParseIssues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseIssues {}

struct Collector {
    issues: Vec<ParseIssue>,
}

impl Collector {
    fn push(&mut self, line: usize, kind: IssueKind, message: impl Into<String>) {
        self.issues.push(ParseIssue {
            line,
            kind,
            message: message.into(),
        });
    }
}

fn normalize_minus(s: &str) -> String {
    s.replace('\u{2212}', "-")
}

fn parse_f64(s: &str) -> Option<f64> {
    normalize_minus(s).parse::<f64>().ok()
}

fn parse_i32(s: &str) -> Option<i32> {
    normalize_minus(s).parse::<i32>().ok()
}

/// Splits `key=value key=(a,b) flag` into pairs; flags get an empty value.
fn attributes(rest: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut chars = rest.trim().char_indices().peekable();
    let src = rest.trim();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let mut key_end = src.len();
        let mut has_value = false;
        while let Some(&(i, c)) = chars.peek() {
            if c == '=' {
                key_end = i;
                has_value = true;
                chars.next();
                break;
            }
            if c.is_whitespace() {
                key_end = i;
                break;
            }
            chars.next();
        }
        let key = src[start..key_end].to_string();
        if key.is_empty() {
            return Err("expected a name before '='".into());
        }
        if !has_value {
            out.push((key, String::new()));
            continue;
        }
        let value = match chars.peek() {
            Some(&(i, '(')) => {
                let close = src[i..]
                    .find(')')
                    .ok_or_else(|| format!("unclosed '(' in value of {key}"))?;
                let end = i + close + 1;
                while chars.peek().is_some_and(|&(j, _)| j < end) {
                    chars.next();
                }
                src[i..end].to_string()
            }
            Some(&(i, c)) if !c.is_whitespace() => {
                let mut end = src.len();
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_whitespace() {
                        end = j;
                        break;
                    }
                    chars.next();
                }
                src[i..end].to_string()
            }
            _ => return Err(format!("missing value after {key}=")),
        };
        out.push((key, value));
    }
    Ok(out)
}

fn parse_tuple(s: &str) -> Option<Vec<i32>> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|x| parse_i32(x.trim())).collect()
}

fn take_attrs(
    issues: &mut Collector,
    line: usize,
    what: &str,
    attrs: Vec<(String, String)>,
    allowed: &[&str],
) -> Option<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut ok = true;
    for (k, v) in attrs {
        if !allowed.contains(&k.as_str()) {
            issues.push(
                line,
                IssueKind::Syntax,
                format!("unknown {what} attribute {k:?}"),
            );
            ok = false;
        } else if map.insert(k.clone(), v).is_some() {
            issues.push(
                line,
                IssueKind::Duplicate,
                format!("{what} attribute {k} given twice"),
            );
            ok = false;
        }
    }
    ok.then_some(map)
}

struct PendingRoute {
    line: usize,
    route: Route,
}

/// Parses a `.pp` source. On failure every issue found is returned, not
/// just the first.
pub fn parse_program(text: &str) -> std::result::Result<PulseProgram, ParseIssues> {
    let mut c = Collector { issues: Vec::new() };
    let mut header: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    let mut pulses: Vec<PulseSpec> = Vec::new();
    let mut routes: Vec<PendingRoute> = Vec::new();
    let mut acquire: Option<(usize, i32)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, rest) = content
            .split_once(char::is_whitespace)
            .map(|(h, r)| (h, r.trim()))
            .unwrap_or((content, ""));
        match head {
            "pulse" => parse_pulse_line(&mut c, line, rest, &mut pulses),
            "route" => parse_route_line(&mut c, line, rest, &mut routes),
            "acquire" => {
                let order = attributes(rest)
                    .map_err(|e| c.push(line, IssueKind::Syntax, e))
                    .ok()
                    .and_then(|a| take_attrs(&mut c, line, "acquire", a, &["order"]));
                let Some(map) = order else { continue };
                match map.get("order").map(|v| parse_i32(v)) {
                    None => c.push(line, IssueKind::Missing, "acquire needs order=<int>"),
                    Some(None) => {
                        c.push(line, IssueKind::Syntax, "acquire order is not an integer")
                    }
                    Some(Some(o)) => {
                        if acquire.is_some() {
                            c.push(line, IssueKind::Duplicate, "acquire given twice");
                        } else {
                            acquire = Some((line, o));
                        }
                    }
                }
            }
            _ => {
                let Some((key, value)) = content.split_once('=') else {
                    c.push(
                        line,
                        IssueKind::Syntax,
                        format!("unrecognized line {content:?}"),
                    );
                    continue;
                };
                let key = key.trim();
                let value = value.trim();
                match HEADER_KEYS.iter().find(|&&k| k == key) {
                    None => c.push(line, IssueKind::Syntax, format!("unknown key {key:?}")),
                    Some(&k) if header.contains_key(k) => {
                        c.push(line, IssueKind::Duplicate, format!("key {k} given twice"))
                    }
                    Some(&k) if value.is_empty() => {
                        c.push(line, IssueKind::Syntax, format!("key {k} has no value"))
                    }
                    Some(&k) => {
                        header.insert(k, (line, value.to_string()));
                    }
                }
            }
        }
    }

    let spin = header_spin(&mut c, &header);
    let mut real = |key: &str, positive: bool| -> Option<f64> {
        let (line, v) = header.get(key)?;
        match parse_f64(v) {
            None => {
                c.push(
                    *line,
                    IssueKind::Syntax,
                    format!("{key} is not a number: {v:?}"),
                );
                None
            }
            Some(x) if !x.is_finite() || x < 0.0 || (positive && x == 0.0) => {
                let req = if positive { "> 0" } else { ">= 0" };
                c.push(
                    *line,
                    IssueKind::Range,
                    format!("{key} must be finite and {req}, got {v}"),
                );
                None
            }
            Some(x) => Some(x),
        }
    };
    let larmor = real("larmor_hz", true);
    let nuq = real("nuq_hz", false);
    let spin_rate = real("spin_rate_hz", false);
    let sw_f2 = real("sw_f2_hz", true);
    let sw_f1 = real("sw_f1_hz", true);
    let ref_hz = real("ref_hz", true);
    let mut points = |key: &str| -> Option<usize> {
        let (line, v) = header.get(key)?;
        match v.parse::<usize>() {
            Err(_) => {
                c.push(
                    *line,
                    IssueKind::Syntax,
                    format!("{key} is not a point count: {v:?}"),
                );
                None
            }
            Ok(n) if n < 2 => {
                c.push(
                    *line,
                    IssueKind::Range,
                    format!("{key} must be >= 2, got {n}"),
                );
                None
            }
            Ok(n) => Some(n),
        }
    };
    let td_f2 = points("td_f2");
    let td_f1 = points("td_f1");

    for key in HEADER_KEYS {
        if !header.contains_key(key) {
            c.push(1, IssueKind::Missing, key);
        }
    }
    if pulses.is_empty() {
        c.push(1, IssueKind::Missing, "pulse");
    }
    match acquire {
        None => c.push(1, IssueKind::Missing, "acquire"),
        Some((line, order)) => {
            if let Some(s) = spin {
                if order.abs() > s.max_order() {
                    c.push(
                        line,
                        IssueKind::Range,
                        format!("acquisition order {order} exceeds 2S = {}", s.max_order()),
                    );
                }
            }
        }
    }
    for r in &routes {
        if !pulses.is_empty() && r.route.dp.len() != pulses.len() {
            c.push(
                r.line,
                IssueKind::Range,
                format!(
                    "route {} has {} dp entries but {} pulses are declared",
                    r.route.name,
                    r.route.dp.len(),
                    pulses.len()
                ),
            );
        }
    }

    if !c.issues.is_empty() {
        c.issues.sort_by_key(|i| i.line);
        return Err(ParseIssues(c.issues));
    }

    let acquisition_order = acquire.map(|(_, o)| o).unwrap_or_default();
    let cycle = CycleSpec::new(pulses, acquisition_order).map_err(|e| {
        ParseIssues(vec![ParseIssue {
            line: 1,
            kind: IssueKind::Range,
            message: e.to_string(),
        }])
    })?;
    // Every field was checked above, so the unwraps cannot fire.
    Ok(PulseProgram {
        spin: spin.unwrap(),
        larmor_hz: larmor.unwrap(),
        nuq_hz: nuq.unwrap(),
        acquisition: Acquisition {
            sw_f2_hz: sw_f2.unwrap(),
            sw_f1_hz: sw_f1.unwrap(),
            td_f2: td_f2.unwrap(),
            td_f1: td_f1.unwrap(),
            ref_hz: ref_hz.unwrap(),
            spin_rate_hz: spin_rate.unwrap(),
        },
        cycle,
        routes: routes.into_iter().map(|r| r.route).collect(),
    })
}

fn header_spin(c: &mut Collector, header: &BTreeMap<&str, (usize, String)>) -> Option<Spin> {
    let (line, v) = header.get("spin")?;
    let Ok(spin) = v.parse::<Spin>() else {
        c.push(
            *line,
            IssueKind::Syntax,
            format!("cannot parse spin {v:?}; write e.g. 5/2"),
        );
        return None;
    };
    match Spin::half_integer(spin.twice()) {
        Ok(s) => Some(s),
        Err(e) => {
            c.push(
                *line,
                IssueKind::Range,
                format!("spin must be half-integer >= 3/2: {e}"),
            );
            None
        }
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn parse_pulse_line(c: &mut Collector, line: usize, rest: &str, pulses: &mut Vec<PulseSpec>) {
    let (id, attrs) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
    if !is_identifier(id) {
        c.push(line, IssueKind::Syntax, "pulse needs an identifier");
        return;
    }
    let attrs = match attributes(attrs) {
        Ok(a) => a,
        Err(e) => return c.push(line, IssueKind::Syntax, e),
    };
    let Some(map) = take_attrs(c, line, "pulse", attrs, &["n_phases", "dp", "hold"]) else {
        return;
    };
    let mut ok = true;
    let n_phases = match map.get("n_phases").map(|v| v.parse::<u32>()) {
        None => {
            c.push(
                line,
                IssueKind::Missing,
                format!("pulse {id} needs n_phases=<int>"),
            );
            None
        }
        Some(Err(_)) => {
            c.push(
                line,
                IssueKind::Syntax,
                format!("pulse {id}: n_phases is not an integer"),
            );
            None
        }
        Some(Ok(0)) => {
            c.push(
                line,
                IssueKind::Range,
                format!("pulse {id}: n_phases must be >= 1"),
            );
            None
        }
        Some(Ok(n)) => Some(n),
    };
    let dp = match map.get("dp").map(|v| parse_i32(v)) {
        None => {
            c.push(
                line,
                IssueKind::Missing,
                format!("pulse {id} needs dp=<int>"),
            );
            None
        }
        Some(None) => {
            c.push(
                line,
                IssueKind::Syntax,
                format!("pulse {id}: dp is not an integer"),
            );
            None
        }
        Some(Some(d)) => Some(d),
    };
    let hold = match map.get("hold") {
        None => false,
        Some(v) if v.is_empty() => true,
        Some(_) => {
            c.push(line, IssueKind::Syntax, "hold is a flag and takes no value");
            ok = false;
            true
        }
    };
    if hold && dp.is_some_and(|d| d != 0) {
        c.push(
            line,
            IssueKind::Range,
            format!("pulse {id} holds the order but has dp != 0"),
        );
        ok = false;
    }
    if pulses.iter().any(|p| p.id == id) {
        c.push(
            line,
            IssueKind::Duplicate,
            format!("pulse id {id} declared twice"),
        );
        ok = false;
    }
    if let (Some(n), Some(d), true) = (n_phases, dp, ok) {
        let mut spec = PulseSpec::new(id, n, d);
        spec.holds_order = hold;
        pulses.push(spec);
    }
}

fn parse_route_line(c: &mut Collector, line: usize, rest: &str, routes: &mut Vec<PendingRoute>) {
    let (name, attrs) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
    if !is_identifier(name) {
        c.push(line, IssueKind::Syntax, "route needs a name");
        return;
    }
    let attrs = match attributes(attrs) {
        Ok(a) => a,
        Err(e) => return c.push(line, IssueKind::Syntax, e),
    };
    let Some(map) = take_attrs(c, line, "route", attrs, &["dp", "t1_branch", "amp"]) else {
        return;
    };
    let dp = match map.get("dp") {
        None => {
            c.push(
                line,
                IssueKind::Missing,
                format!("route {name} needs dp=(...)"),
            );
            None
        }
        Some(v) => {
            let t = parse_tuple(v);
            if t.is_none() {
                c.push(
                    line,
                    IssueKind::Syntax,
                    format!("route {name}: bad dp tuple {v:?}"),
                );
            }
            t
        }
    };
    let branch = match map.get("t1_branch") {
        None => {
            c.push(
                line,
                IssueKind::Missing,
                format!("route {name} needs t1_branch"),
            );
            None
        }
        Some(v) => match v.parse::<TransitionLabel>() {
            Ok(b) => Some(b),
            Err(e) => {
                c.push(line, IssueKind::Syntax, format!("route {name}: {e}"));
                None
            }
        },
    };
    let amp = match map.get("amp").map(|v| (v, parse_f64(v))) {
        None => {
            c.push(
                line,
                IssueKind::Missing,
                format!("route {name} needs amp=<float>"),
            );
            None
        }
        Some((v, None)) => {
            c.push(
                line,
                IssueKind::Syntax,
                format!("route {name}: amp {v:?} is not a number"),
            );
            None
        }
        Some((_, Some(a))) if !a.is_finite() || a.abs() > 1.0 => {
            c.push(
                line,
                IssueKind::Range,
                format!("route {name}: |amp| must be <= 1, got {a}"),
            );
            None
        }
        Some((_, Some(a))) => Some(a),
    };
    if routes.iter().any(|r| r.route.name == name) {
        c.push(
            line,
            IssueKind::Duplicate,
            format!("route {name} declared twice"),
        );
        return;
    }
    if let (Some(dp), Some(t1_branch), Some(amplitude)) = (dp, branch, amp) {
        routes.push(PendingRoute {
            line,
            route: Route {
                name: name.to_string(),
                dp,
                t1_branch,
                amplitude,
            },
        });
    }
}

/// Canonical text for a program; `parse_program(render_program(p)) == p`.
pub fn render_program(prog: &PulseProgram) -> String {
    let mut s = String::new();
    let a = &prog.acquisition;
    let _ = writeln!(s, "spin = {}", prog.spin);
    let _ = writeln!(s, "larmor_hz = {}", prog.larmor_hz);
    let _ = writeln!(s, "nuq_hz = {}", prog.nuq_hz);
    let _ = writeln!(s, "spin_rate_hz = {}", a.spin_rate_hz);
    let _ = writeln!(s, "sw_f2_hz = {}", a.sw_f2_hz);
    let _ = writeln!(s, "sw_f1_hz = {}", a.sw_f1_hz);
    let _ = writeln!(s, "td_f2 = {}", a.td_f2);
    let _ = writeln!(s, "td_f1 = {}", a.td_f1);
    let _ = writeln!(s, "ref_hz = {}", a.ref_hz);
    s.push('\n');
    for p in prog.cycle.pulses() {
        let _ = write!(
            s,
            "pulse {} n_phases={} dp={:+}",
            p.id, p.n_phases, p.dp_desired
        );
        if p.holds_order {
            s.push_str(" hold");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "acquire order={:+}", prog.cycle.acquisition_order());
    if !prog.routes.is_empty() {
        s.push('\n');
    }
    for r in &prog.routes {
        let dp: Vec<String> = r.dp.iter().map(|d| format!("{d:+}")).collect();
        let _ = writeln!(
            s,
            "route {} dp=({}) t1_branch={} amp={:?}",
            r.name,
            dp.join(","),
            r.t1_branch,
            r.amplitude
        );
    }
    s
}

/// Route names in program order that share a pathway's `dp`.
pub fn routes_matching<'a>(prog: &'a PulseProgram, dp: &[i32]) -> Vec<&'a Route> {
    prog.routes.iter().filter(|r| r.dp == dp).collect()
}
