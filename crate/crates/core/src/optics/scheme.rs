//! Declarative optical schemes: source, ordered elements, post-selection
//! and an optional target state.
//!
//! Mode names are the declared spatial ports. When `polarized` is set
//! (the default) every port `p` owns the modes `p.H` and `p.V`, in that
//! order. Element and post-selection targets may name ports or modes.
//!
//! ```json
//! {
//!   "name": "tritter",
//!   "modes": ["p1", "p2", "p3"],
//!   "source": {"kind": "fock", "occupations": {"p1.H": 1, "p2.H": 1, "p3.V": 1}},
//!   "elements": [{"type": "dft", "targets": ["p1", "p2", "p3"]}],
//!   "postselect": [{"modes": ["p1"], "count": 1}, {"modes": ["p2"], "count": 1},
//!                  {"modes": ["p3"], "count": 1}],
//!   "target_state": {"kind": "wv", "ports": ["p1", "p2", "p3"]}
//! }
//! ```
//!
//! Beamsplitters follow `[[cos θ, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ]]`
//! with θ = π/4, φ = 0 by default. Angles are in radians.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::{
    apply_mode_unitary, beamsplitter, bs_v, hwp, multiport_dft, pbs, phase, photonic_w1,
    photonic_wv, postselect, psi4, qwp, subset_fidelity, two_crystal, Condition, Count,
    FockVector, ModeUnitary, DEFAULT_N_MAX,
};
use crate::corelin::{real, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalScheme {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Declared spatial ports.
    pub modes: Vec<String>,
    #[serde(default = "default_true")]
    pub polarized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub source: SourceSpec,
    #[serde(default)]
    pub elements: Vec<ElementSpec>,
    pub postselect: Vec<ConditionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_state: Option<TargetSpec>,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Sps { mode: String },
    Fock { occupations: BTreeMap<String, usize> },
    TwoCrystal { port: String, a: f64, b: f64, c: f64 },
    Psi4 { a: String, b: String },
    W1 { modes: Vec<String> },
    Wv { ports: Vec<String> },
    /// Independent sources on disjoint modes.
    Product { parts: Vec<SourceSpec> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Beamsplitter,
    Dft,
    Pbs,
    Hwp,
    Qwp,
    BsV,
    Phase,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_v: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    #[serde(rename = "type")]
    pub kind: ElementKind,
    #[serde(default)]
    pub params: ElementParams,
    pub targets: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub modes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_least: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    W1 { modes: Vec<String> },
    Wv { ports: Vec<String> },
    Fock { modes: Vec<String>, terms: Vec<TargetTerm> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetTerm {
    pub occupations: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl OpticalScheme {
    /// Parses scheme JSON; errors name the offending field and position.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::InvalidScheme(format!(
                "field `{path}` (line {}, column {}): {inner}",
                inner.line(),
                inner.column()
            ))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Mode names in register order.
    pub fn mode_names(&self) -> Vec<String> {
        if self.polarized {
            self.modes
                .iter()
                .flat_map(|p| [format!("{p}.H"), format!("{p}.V")])
                .collect()
        } else {
            self.modes.clone()
        }
    }
}

struct Layout {
    names: Vec<String>,
    ports: Vec<String>,
    polarized: bool,
}

enum Target {
    Port(usize),
    Mode(usize),
}

impl Layout {
    fn new(s: &OpticalScheme) -> Result<Self> {
        let names = s.mode_names();
        let mut sorted = names.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) || s.modes.is_empty() {
            return Err(Error::InvalidScheme("`modes` must be distinct and non-empty".into()));
        }
        Ok(Self {
            names,
            ports: s.modes.clone(),
            polarized: s.polarized,
        })
    }

    fn len(&self) -> usize {
        self.names.len()
    }

    fn resolve(&self, name: &str, ctx: &str) -> Result<Target> {
        if let Some(p) = self.ports.iter().position(|p| p == name) {
            return Ok(Target::Port(p));
        }
        if let Some(m) = self.names.iter().position(|m| m == name) {
            return Ok(Target::Mode(m));
        }
        Err(Error::InvalidScheme(format!("{ctx}: undeclared mode `{name}`")))
    }

    fn port_modes(&self, p: usize) -> Vec<usize> {
        if self.polarized {
            vec![2 * p, 2 * p + 1]
        } else {
            vec![p]
        }
    }

    fn mode(&self, name: &str, ctx: &str) -> Result<usize> {
        match self.resolve(name, ctx)? {
            Target::Mode(m) => Ok(m),
            Target::Port(p) if !self.polarized => Ok(p),
            Target::Port(_) => Err(Error::InvalidScheme(format!(
                "{ctx}: `{name}` is a polarized port, name a mode such as `{name}.H`"
            ))),
        }
    }

    fn port(&self, name: &str, ctx: &str) -> Result<usize> {
        match self.resolve(name, ctx)? {
            Target::Port(p) => Ok(p),
            Target::Mode(_) => Err(Error::InvalidScheme(format!("{ctx}: `{name}` is not a port"))),
        }
    }

    /// All modes of the named ports or modes, flattened.
    fn group(&self, names: &[String], ctx: &str) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for n in names {
            match self.resolve(n, ctx)? {
                Target::Port(p) => out.extend(self.port_modes(p)),
                Target::Mode(m) => out.push(m),
            }
        }
        Ok(out)
    }

    /// Mode lists for a spatial element: one list per polarization when
    /// every target is a polarized port, otherwise the named modes.
    fn spatial(&self, names: &[String], ctx: &str) -> Result<Vec<Vec<usize>>> {
        let resolved = names
            .iter()
            .map(|n| self.resolve(n, ctx))
            .collect::<Result<Vec<_>>>()?;
        if self.polarized && resolved.iter().all(|t| matches!(t, Target::Port(_))) {
            let ports: Vec<usize> = resolved
                .iter()
                .map(|t| match t {
                    Target::Port(p) => *p,
                    Target::Mode(_) => unreachable!(),
                })
                .collect();
            Ok(vec![
                ports.iter().map(|p| 2 * p).collect(),
                ports.iter().map(|p| 2 * p + 1).collect(),
            ])
        } else {
            Ok(vec![names
                .iter()
                .map(|n| self.mode(n, ctx))
                .collect::<Result<Vec<_>>>()?])
        }
    }

    fn polarization_port(&self, names: &[String], ctx: &str) -> Result<Vec<usize>> {
        if !self.polarized {
            return Err(Error::InvalidScheme(format!("{ctx}: scheme is not polarized")));
        }
        match names {
            [one] => Ok(self.port_modes(self.port(one, ctx)?)),
            _ => Err(Error::InvalidScheme(format!("{ctx}: expects exactly one port"))),
        }
    }
}

fn need(v: Option<f64>, ctx: &str, field: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidScheme(format!("{ctx}.params.{field} is required")))
}

fn build_source(spec: &SourceSpec, l: &Layout, n_max: usize, ctx: &str) -> Result<FockVector> {
    let total = l.len();
    let state = match spec {
        SourceSpec::Sps { mode } => {
            let mut occ = vec![0; total];
            occ[l.mode(mode, ctx)?] = 1;
            FockVector::new(total, n_max, [(occ, C64::new(1.0, 0.0))])?
        }
        SourceSpec::Fock { occupations } => {
            let mut occ = vec![0; total];
            for (name, &n) in occupations {
                occ[l.mode(name, ctx)?] += n;
            }
            FockVector::new(total, n_max, [(occ, C64::new(1.0, 0.0))])?
        }
        SourceSpec::TwoCrystal { port, a, b, c } => {
            let p = l.port(port, ctx)?;
            two_crystal(real(*a), real(*b), real(*c))?
                .with_n_max(n_max)?
                .embed(total, &l.polarization_port(std::slice::from_ref(&l.ports[p]), ctx)?)?
        }
        SourceSpec::Psi4 { a, b } => {
            let pa = l.polarization_port(std::slice::from_ref(a), ctx)?;
            let pb = l.polarization_port(std::slice::from_ref(b), ctx)?;
            psi4()?.with_n_max(n_max)?.embed(total, &[pa, pb].concat())?
        }
        SourceSpec::W1 { modes } => {
            let ms = modes.iter().map(|m| l.mode(m, ctx)).collect::<Result<Vec<_>>>()?;
            photonic_w1(ms.len())?.with_n_max(n_max)?.embed(total, &ms)?
        }
        SourceSpec::Wv { ports } => {
            let ms = l.group(ports, ctx)?;
            if !l.polarized || ms.len() != 2 * ports.len() {
                return Err(Error::InvalidScheme(format!("{ctx}: wv source needs polarized ports")));
            }
            photonic_wv(ports.len())?.with_n_max(n_max)?.embed(total, &ms)?
        }
        SourceSpec::Product { parts } => {
            let mut acc = FockVector::vacuum(total, n_max);
            for (i, part) in parts.iter().enumerate() {
                let s = build_source(part, l, n_max, &format!("{ctx}.parts[{i}]"))?;
                acc = product_disjoint(&acc, &s, n_max)?;
            }
            acc
        }
    };
    Ok(state)
}

/// Product of two states on the same register that occupy disjoint modes.
fn product_disjoint(x: &FockVector, y: &FockVector, n_max: usize) -> Result<FockVector> {
    let used = |s: &FockVector| -> Vec<bool> {
        let mut u = vec![false; s.modes()];
        for (o, _) in s.terms() {
            for (k, &n) in o.iter().enumerate() {
                u[k] |= n > 0;
            }
        }
        u
    };
    let (ux, uy) = (used(x), used(y));
    if ux.iter().zip(&uy).any(|(a, b)| *a && *b) {
        return Err(Error::InvalidScheme("product source parts overlap".into()));
    }
    let terms: Vec<_> = x
        .terms()
        .flat_map(|(o1, a1)| {
            y.terms().map(move |(o2, a2)| {
                let occ: Vec<usize> = o1.iter().zip(o2).map(|(p, q)| p + q).collect();
                (occ, a1 * a2)
            })
        })
        .collect();
    FockVector::new(x.modes(), n_max, terms)
}

fn element_ops(e: &ElementSpec, l: &Layout, ctx: &str) -> Result<Vec<(ModeUnitary, Vec<usize>)>> {
    let p = &e.params;
    let t = &e.targets;
    let each = |u: ModeUnitary, lists: Vec<Vec<usize>>| -> Result<Vec<(ModeUnitary, Vec<usize>)>> {
        lists
            .into_iter()
            .map(|ms| {
                if ms.len() != u.dim() {
                    Err(Error::InvalidScheme(format!(
                        "{ctx}.targets: expected {} modes, got {}",
                        u.dim(),
                        ms.len()
                    )))
                } else {
                    Ok((u.clone(), ms))
                }
            })
            .collect()
    };
    match e.kind {
        ElementKind::Beamsplitter => each(
            beamsplitter(p.theta.unwrap_or(FRAC_PI_4), p.phi.unwrap_or(0.0)),
            l.spatial(t, ctx)?,
        ),
        ElementKind::Dft => {
            if t.len() < 2 {
                return Err(Error::InvalidScheme(format!("{ctx}.targets: dft needs two or more")));
            }
            each(multiport_dft(t.len()), l.spatial(t, ctx)?)
        }
        ElementKind::Phase => each(phase(need(p.phi, ctx, "phi")?), l.spatial(t, ctx)?),
        ElementKind::Hwp => each(hwp(need(p.angle, ctx, "angle")?), vec![l.polarization_port(t, ctx)?]),
        ElementKind::Qwp => each(qwp(need(p.angle, ctx, "angle")?), vec![l.polarization_port(t, ctx)?]),
        ElementKind::Pbs => {
            if t.len() != 2 {
                return Err(Error::InvalidScheme(format!("{ctx}.targets: pbs needs two ports")));
            }
            let modes = [
                l.polarization_port(&t[..1], ctx)?,
                l.polarization_port(&t[1..], ctx)?,
            ]
            .concat();
            each(pbs(), vec![modes])
        }
        ElementKind::BsV => {
            if t.len() != 2 {
                return Err(Error::InvalidScheme(format!(
                    "{ctx}.targets: bs_v needs a port and an auxiliary port or mode"
                )));
            }
            let v = l.polarization_port(&t[..1], ctx)?[1];
            let aux = match l.resolve(&t[1], ctx)? {
                Target::Port(q) => *l.port_modes(q).last().expect("ports own modes"),
                Target::Mode(m) => m,
            };
            each(bs_v(need(p.t_v, ctx, "t_v")?), vec![vec![v, aux]])
        }
    }
}

fn build_target(spec: &TargetSpec, l: &Layout, n_max: usize) -> Result<(FockVector, Vec<usize>)> {
    let ctx = "target_state";
    match spec {
        TargetSpec::W1 { modes } => {
            let ms = modes.iter().map(|m| l.mode(m, ctx)).collect::<Result<Vec<_>>>()?;
            Ok((photonic_w1(ms.len())?, ms))
        }
        TargetSpec::Wv { ports } => {
            if !l.polarized {
                return Err(Error::InvalidScheme(format!("{ctx}: wv needs polarized ports")));
            }
            let ms = ports
                .iter()
                .map(|p| l.port(p, ctx).map(|q| l.port_modes(q)))
                .collect::<Result<Vec<_>>>()?
                .concat();
            Ok((photonic_wv(ports.len())?, ms))
        }
        TargetSpec::Fock { modes, terms } => {
            let ms = modes.iter().map(|m| l.mode(m, ctx)).collect::<Result<Vec<_>>>()?;
            let v = FockVector::normalized(
                ms.len(),
                n_max,
                terms
                    .iter()
                    .map(|t| (t.occupations.clone(), C64::new(t.re, t.im))),
            )?;
            Ok((v, ms))
        }
    }
}

/// Outcome of running a scheme.
#[derive(Clone, Debug)]
pub struct SchemeReport {
    pub name: String,
    pub mode_names: Vec<String>,
    pub probability: f64,
    /// Fidelity of the conditional state (reduced to the target modes)
    /// with the declared target.
    pub fidelity: Option<f64>,
    pub conditional: Option<FockVector>,
}

/// Runs source → elements (in order) → post-selection → target fidelity.
/// `n_max` overrides the scheme's own truncation.
pub fn run_scheme(scheme: &OpticalScheme, n_max: Option<usize>) -> Result<SchemeReport> {
    let layout = Layout::new(scheme)?;
    let n_max = n_max.or(scheme.n_max).unwrap_or(DEFAULT_N_MAX);
    let mut state = build_source(&scheme.source, &layout, n_max, "source")?;
    for (i, e) in scheme.elements.iter().enumerate() {
        for (u, modes) in element_ops(e, &layout, &format!("elements[{i}]"))? {
            state = apply_mode_unitary(&state, &u, &modes)?;
        }
    }
    if scheme.postselect.is_empty() {
        return Err(Error::InvalidScheme("`postselect` is empty".into()));
    }
    let pattern = scheme
        .postselect
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let ctx = format!("postselect[{i}]");
            let count = match (c.count, c.at_least) {
                (Some(k), None) => Count::Exactly(k),
                (None, Some(k)) => Count::AtLeast(k),
                _ => {
                    return Err(Error::InvalidScheme(format!(
                        "{ctx}: give exactly one of `count` and `at_least`"
                    )))
                }
            };
            Ok(Condition {
                modes: layout.group(&c.modes, &ctx)?,
                count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ps = postselect(&state, &pattern)?;
    let fidelity = match (&scheme.target_state, &ps.conditional) {
        (Some(t), Some(c)) => {
            let (target, modes) = build_target(t, &layout, n_max)?;
            Some(subset_fidelity(c, &target, &modes)?)
        }
        (Some(_), None) => Some(0.0),
        (None, _) => None,
    };
    Ok(SchemeReport {
        name: scheme.name.clone(),
        mode_names: layout.names,
        probability: ps.probability,
        fidelity,
        conditional: ps.conditional,
    })
}

/// Trigger analyzer settings for the four-photon-source scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriggerPolarization {
    H,
    V,
    Plus45,
    Minus45,
}

impl TriggerPolarization {
    pub const ALL: [TriggerPolarization; 4] = [Self::H, Self::V, Self::Plus45, Self::Minus45];

    pub fn label(self) -> &'static str {
        match self {
            Self::H => "H",
            Self::V => "V",
            Self::Plus45 => "+45",
            Self::Minus45 => "-45",
        }
    }

    /// Half-wave plate angle and detected mode suffix realizing the
    /// projection.
    fn analyzer(self) -> (f64, &'static str) {
        use std::f64::consts::FRAC_PI_8;
        match self {
            Self::H => (0.0, "H"),
            Self::V => (0.0, "V"),
            Self::Plus45 => (FRAC_PI_8, "H"),
            Self::Minus45 => (-FRAC_PI_8, "H"),
        }
    }
}

/// Rewrites a scheme whose port `trigger` is analyzed: appends a wave
/// plate and replaces any condition on `trigger` with a single photon in
/// the projected polarization.
pub fn with_trigger(scheme: &OpticalScheme, trigger: &str, pol: TriggerPolarization) -> OpticalScheme {
    let (angle, keep) = pol.analyzer();
    let drop = if keep == "H" { "V" } else { "H" };
    let mut s = scheme.clone();
    s.elements.push(ElementSpec {
        kind: ElementKind::Hwp,
        params: ElementParams {
            angle: Some(angle),
            ..Default::default()
        },
        targets: vec![trigger.to_string()],
    });
    s.postselect.retain(|c| c.modes.iter().all(|m| m != trigger && !m.starts_with(&format!("{trigger}."))));
    s.postselect.push(ConditionSpec {
        modes: vec![format!("{trigger}.{keep}")],
        count: Some(1),
        at_least: None,
    });
    s.postselect.push(ConditionSpec {
        modes: vec![format!("{trigger}.{drop}")],
        count: Some(0),
        at_least: None,
    });
    s
}

/// Runs every trigger setting; returns them in [`TriggerPolarization::ALL`]
/// order.
pub fn trigger_search(
    scheme: &OpticalScheme,
    trigger: &str,
    n_max: Option<usize>,
) -> Result<Vec<(TriggerPolarization, SchemeReport)>> {
    TriggerPolarization::ALL
        .iter()
        .map(|&p| Ok((p, run_scheme(&with_trigger(scheme, trigger, p), n_max)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRITTER: &str = r#"{
      "name": "tritter",
      "modes": ["p1", "p2", "p3"],
      "source": {"kind": "fock", "occupations": {"p1.H": 1, "p2.H": 1, "p3.V": 1}},
      "elements": [{"type": "dft", "targets": ["p1", "p2", "p3"]}],
      "postselect": [{"modes": ["p1"], "count": 1}, {"modes": ["p2"], "count": 1},
                     {"modes": ["p3"], "count": 1}],
      "target_state": {"kind": "wv", "ports": ["p1", "p2", "p3"]}
    }"#;

    #[test]
    fn tritter_one_ninth() {
        let r = run_scheme(&OpticalScheme::parse(TRITTER).unwrap(), None).unwrap();
        assert!((r.probability - 1.0 / 9.0).abs() < 1e-12);
        assert!((r.fidelity.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_scheme() {
        let s = OpticalScheme::parse(
            r#"{"name":"t","modes":["a","b"],"polarized":false,
                "source":{"kind":"sps","mode":"a"},
                "postselect":[{"modes":["a"],"count":1}]}"#,
        )
        .unwrap();
        let r = run_scheme(&s, None).unwrap();
        assert_eq!(r.probability, 1.0);
        assert!(r.fidelity.is_none());
    }

    #[test]
    fn parse_errors_name_the_field() {
        let bad = TRITTER.replace("\"count\": 1}, {\"modes\": [\"p2\"]", "\"cnt\": 1}, {\"modes\": [\"p2\"]");
        let msg = OpticalScheme::parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("postselect[0]"), "{msg}");
        let bad = TRITTER.replace("\"dft\"", "\"prism\"");
        let msg = OpticalScheme::parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("elements[0].type"), "{msg}");
    }

    #[test]
    fn undeclared_mode_is_rejected() {
        let bad = TRITTER.replace("[\"p1\", \"p2\", \"p3\"]}]", "[\"p1\", \"p2\", \"q\"]}]");
        let s = OpticalScheme::parse(&bad).unwrap();
        let msg = run_scheme(&s, None).unwrap_err().to_string();
        assert!(msg.contains("`q`"), "{msg}");
    }

    #[test]
    fn truncation_override() {
        let s = OpticalScheme::parse(TRITTER).unwrap();
        assert!(matches!(run_scheme(&s, Some(2)), Err(Error::Truncation { .. })));
    }

    #[test]
    fn complement_patterns_sum_to_one() {
        let s = OpticalScheme::parse(TRITTER).unwrap();
        let p_one = run_scheme(&s, None).unwrap().probability;
        // complement: some port holds two or more photons
        let mut rest = 0.0;
        for port in ["p1", "p2", "p3"] {
            let mut c = s.clone();
            c.target_state = None;
            c.postselect = vec![ConditionSpec {
                modes: vec![port.into()],
                count: None,
                at_least: Some(2),
            }];
            rest += run_scheme(&c, None).unwrap().probability;
        }
        // at most one port can hold two or more of three photons
        assert!((p_one + rest - 1.0).abs() < 1e-12);
    }
}
