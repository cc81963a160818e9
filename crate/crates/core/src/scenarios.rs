//! Scenario definitions: the built-in gedanken experiments and a JSON file
//! format for user-defined pre/post-selected setups.
//!
//! A scenario bundles a subsystem layout, an initial state, a set of
//! measurement events (with the forced outcomes that define the
//! post-selection), and a list of analyses to run. Amplitudes are serialized
//! as `[re, im]` pairs in lexicographic computational-basis order — the same
//! flat order [`SubsystemLayout`] uses internally — so there is exactly one
//! canonical reading of every document.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{MeasurementEvent, Ordering};
use crate::hilbert::{Ket, Operator, SubsystemLayout, DEFAULT_EPS};
use crate::measurement::{validate_observable, Branch, Observable, PauliAxis, ValidationReport};
use crate::tsvf::{product_observable, TwoStateVector};
use crate::weak::WeakMeasurementConfig;

/// Serialized form of a scenario. The JSON layout is the exchange format;
/// [`Scenario`] is the validated in-memory form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub name: String,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_labels: Option<Vec<Vec<String>>>,
    /// Amplitudes as `[re, im]`, flat lexicographic basis order.
    pub initial: Vec<[f64; 2]>,
    /// Unnormalized input is rejected unless this explicit opt-in is set.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
    pub events: Vec<EventDocument>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analyses: Vec<AnalysisRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventDocument {
    pub id: String,
    /// Subsystem a keyword observable acts on; ignored for explicit branches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    pub observable: ObservableDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_outcome: Option<String>,
}

/// Either a named standard observable (`"sigma_x"`, `"sigma_y"`, `"sigma_z"`,
/// requires `target`) or an explicit projector decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableDocument {
    Keyword(String),
    Explicit { branches: Vec<BranchDocument> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDocument {
    pub label: String,
    pub eigenvalue: f64,
    /// Row-major matrix of `[re, im]` entries.
    pub projector: Vec<Vec<[f64; 2]>>,
}

/// One analysis a scenario asks for. Operator specs are compact strings like
/// `"z1"`, `"x2"`, or `"z1z2"` — an axis letter followed by a 1-based
/// particle index, concatenated for products (see [`parse_operator_spec`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalysisRequest {
    CompareOrderings {
        orderings: Vec<Vec<String>>,
    },
    Abl {
        observable: String,
    },
    Eor {
        observable: String,
    },
    CheckRules {
        a: String,
        b: String,
    },
    WeakValue {
        operator: String,
    },
    WeakMc {
        operator: String,
        #[serde(flatten)]
        config: WeakMeasurementConfig,
    },
}

/// A validated, ready-to-analyze scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    doc: ScenarioDocument,
    layout: SubsystemLayout,
    initial: Ket,
    events: Vec<MeasurementEvent>,
}

impl Scenario {
    pub fn name(&self) -> &str {
        &self.doc.name
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn basis_labels(&self) -> Option<&[Vec<String>]> {
        self.doc.basis_labels.as_deref()
    }

    pub fn initial(&self) -> &Ket {
        &self.initial
    }

    pub fn events(&self) -> &[MeasurementEvent] {
        &self.events
    }

    pub fn event(&self, id: &str) -> Option<&MeasurementEvent> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn analyses(&self) -> &[AnalysisRequest] {
        &self.doc.analyses
    }

    /// The serializable form this scenario was built from.
    pub fn document(&self) -> &ScenarioDocument {
        &self.doc
    }

    /// Orderings of the first ordering-comparison analysis, if any.
    pub fn comparison_orderings(&self) -> Option<Vec<Ordering>> {
        self.doc.analyses.iter().find_map(|a| match a {
            AnalysisRequest::CompareOrderings { orderings } => Some(
                orderings
                    .iter()
                    .map(|seq| Ordering::new(seq.iter().cloned()))
                    .collect(),
            ),
            _ => None,
        })
    }

    /// The two boundary states: pre-selection is the initial state,
    /// post-selection is what remains after collapsing through every event's
    /// forced outcome in listed order. (For commuting events any order gives
    /// the same state; the listed order is the canonical one.)
    pub fn two_state_vector(&self, eps: f64) -> Result<TwoStateVector> {
        let steps = self
            .events
            .iter()
            .map(|e| {
                let outcome = e
                    .forced_outcome
                    .as_deref()
                    .ok_or_else(|| Error::UnforcedEvent { id: e.id.clone() })?;
                Ok((&e.observable, outcome))
            })
            .collect::<Result<Vec<_>>>()?;
        let record = crate::measurement::measure_sequence(&self.initial, &steps, eps)?;
        let post = record
            .trajectory
            .last()
            .expect("trajectory is never empty")
            .clone();
        TwoStateVector::new(self.initial.clone(), post, eps)
    }

    pub fn from_document(doc: &ScenarioDocument, eps: f64) -> Result<Self> {
        build(doc, eps).map_err(|report| Error::ScenarioInvalid {
            report: report.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("document serialization cannot fail")
    }
}

/// Parse and validate a scenario document.
pub fn load_scenario_str(json: &str, eps: f64) -> Result<Scenario> {
    let doc: ScenarioDocument =
        serde_json::from_str(json).map_err(|e| Error::ScenarioParse(e.to_string()))?;
    Scenario::from_document(&doc, eps)
}

/// All invariant violations in a document, each located by a path into it.
/// An empty report means [`Scenario::from_document`] will succeed.
pub fn validate_document(doc: &ScenarioDocument, eps: f64) -> ValidationReport {
    match build(doc, eps) {
        Ok(_) => ValidationReport::default(),
        Err(report) => report,
    }
}

fn operator_from_matrix(
    layout: &SubsystemLayout,
    rows: &[Vec<[f64; 2]>],
) -> std::result::Result<Operator, String> {
    let dim = layout.total_dim();
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        let cols = rows.first().map_or(0, Vec::len);
        return Err(format!(
            "projector matrix is {}x{cols}, expected {dim}x{dim}",
            rows.len()
        ));
    }
    let entries = rows
        .iter()
        .flat_map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)))
        .collect();
    Operator::from_entries(layout.clone(), entries).map_err(|e| e.to_string())
}

fn build(doc: &ScenarioDocument, eps: f64) -> std::result::Result<Scenario, ValidationReport> {
    let mut report = ValidationReport::default();
    let layout = match SubsystemLayout::new(doc.dims.clone()) {
        Ok(layout) => layout,
        Err(e) => {
            report.push(format!("dims: {e}"));
            return Err(report);
        }
    };

    if let Some(labels) = &doc.basis_labels {
        if labels.len() != layout.subsystem_count() {
            report.push(format!(
                "basis_labels: {} label lists for {} subsystem(s)",
                labels.len(),
                layout.subsystem_count()
            ));
        } else {
            for (k, inner) in labels.iter().enumerate() {
                if inner.len() != layout.dims()[k] {
                    report.push(format!(
                        "basis_labels[{k}]: {} labels for dimension {}",
                        inner.len(),
                        layout.dims()[k]
                    ));
                }
            }
        }
    }

    let mut initial = None;
    if doc.initial.len() != layout.total_dim() {
        report.push(format!(
            "initial: {} amplitudes, but layout {layout} requires {}",
            doc.initial.len(),
            layout.total_dim()
        ));
    } else {
        let amps = doc
            .initial
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        match Ket::new(layout.clone(), amps) {
            Ok(ket) if doc.normalize => match ket.normalize() {
                Ok(ket) => initial = Some(ket),
                Err(e) => report.push(format!("initial: {e}")),
            },
            Ok(ket) => {
                if ket.is_normalized(eps) {
                    initial = Some(ket);
                } else {
                    report.push(format!(
                        "initial: not normalized (<psi|psi> = {}); set \"normalize\": true to opt \
                         into rescaling",
                        ket.norm_sqr()
                    ));
                }
            }
            Err(e) => report.push(format!("initial: {e}")),
        }
    }

    let mut events = Vec::new();
    for (i, ev) in doc.events.iter().enumerate() {
        let path = format!("events[{i}] ('{}')", ev.id);
        if doc.events[..i].iter().any(|prior| prior.id == ev.id) {
            report.push(format!("{path}: duplicate event id"));
        }
        let observable = match &ev.observable {
            ObservableDocument::Keyword(word) => match (word.parse::<PauliAxis>(), ev.target) {
                (Err(_), _) => {
                    report.push(format!(
                        "{path}: unknown observable keyword '{word}' (expected sigma_x, sigma_y, \
                         or sigma_z)"
                    ));
                    None
                }
                (Ok(_), None) => {
                    report.push(format!(
                        "{path}: keyword observable '{word}' requires a target subsystem"
                    ));
                    None
                }
                (Ok(axis), Some(target)) => match Observable::pauli(axis, target, &layout) {
                    Ok(obs) => Some(obs),
                    Err(e) => {
                        report.push(format!("{path}: {e}"));
                        None
                    }
                },
            },
            ObservableDocument::Explicit { branches } => {
                let mut built = Vec::new();
                let mut ok = true;
                for (bi, b) in branches.iter().enumerate() {
                    match operator_from_matrix(&layout, &b.projector) {
                        Ok(op) => built.push(Branch::new(b.label.clone(), b.eigenvalue, op)),
                        Err(msg) => {
                            report.push(format!("{path}.branches[{bi}] ('{}'): {msg}", b.label));
                            ok = false;
                        }
                    }
                }
                if ok {
                    let check = validate_observable(&layout, &built, eps);
                    if check.passed() {
                        Some(
                            Observable::new(layout.clone(), built, eps)
                                .expect("observable was just validated"),
                        )
                    } else {
                        for issue in check.issues {
                            report.push(format!("{path}: {issue}"));
                        }
                        None
                    }
                } else {
                    None
                }
            }
        };
        if let Some(observable) = observable {
            if let Some(forced) = &ev.forced_outcome {
                if observable.branch(forced).is_none() {
                    report.push(format!(
                        "{path}: forced outcome '{forced}' is not one of the outcome labels"
                    ));
                }
            }
            events.push(MeasurementEvent {
                id: ev.id.clone(),
                observable,
                forced_outcome: ev.forced_outcome.clone(),
            });
        }
    }

    let event_ids: Vec<&str> = doc.events.iter().map(|e| e.id.as_str()).collect();
    for (j, analysis) in doc.analyses.iter().enumerate() {
        let path = format!("analyses[{j}]");
        let mut check_spec = |spec: &str| {
            if let Err(e) = parse_operator_spec(spec, &layout) {
                report.push(format!("{path}: {e}"));
            }
        };
        match analysis {
            AnalysisRequest::CompareOrderings { orderings } => {
                if orderings.len() < 2 {
                    report.push(format!("{path}: at least two orderings are required"));
                }
                for (k, seq) in orderings.iter().enumerate() {
                    let mut seen = seq.iter().map(String::as_str).collect::<Vec<_>>();
                    seen.sort_unstable();
                    seen.dedup();
                    let all_known = seq.iter().all(|id| event_ids.contains(&id.as_str()));
                    if seq.len() != event_ids.len() || seen.len() != seq.len() || !all_known {
                        report.push(format!(
                            "{path}.orderings[{k}]: [{}] is not a permutation of the event ids",
                            seq.join(", ")
                        ));
                    }
                }
            }
            AnalysisRequest::Abl { observable } | AnalysisRequest::Eor { observable } => {
                check_spec(observable)
            }
            AnalysisRequest::CheckRules { a, b } => {
                check_spec(a);
                check_spec(b);
            }
            AnalysisRequest::WeakValue { operator } => check_spec(operator),
            AnalysisRequest::WeakMc { operator, config } => {
                check_spec(operator);
                if let Err(e) = config.validate() {
                    report.push(format!("{path}: {e}"));
                }
            }
        }
    }

    if !report.passed() {
        return Err(report);
    }
    Ok(Scenario {
        doc: doc.clone(),
        layout,
        initial: initial.expect("initial issues would have been reported"),
        events,
    })
}

/// Parse a compact operator spec: an axis letter (`x`, `y`, `z`) followed by
/// a 1-based particle index, concatenated for tensor products. `"z1"` is the
/// z component of particle 1; `"z1z2"` is the degenerate product observable
/// of the two z components.
pub fn parse_operator_spec(spec: &str, layout: &SubsystemLayout) -> Result<Observable> {
    let bad = |reason: String| Error::BadOperatorSpec {
        spec: spec.to_string(),
        reason,
    };
    let chars: Vec<char> = spec.trim().to_ascii_lowercase().chars().collect();
    if chars.is_empty() {
        return Err(bad("empty spec".to_string()));
    }
    let mut atoms: Vec<(PauliAxis, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let axis = match chars[i] {
            'x' => PauliAxis::X,
            'y' => PauliAxis::Y,
            'z' => PauliAxis::Z,
            c => return Err(bad(format!("unexpected character '{c}', expected x, y, or z"))),
        };
        i += 1;
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(bad(
                "an axis letter must be followed by a 1-based particle index".to_string(),
            ));
        }
        let digits: String = chars[start..i].iter().collect();
        let index: usize = digits
            .parse()
            .map_err(|_| bad(format!("particle index '{digits}' is out of range")))?;
        if index == 0 {
            return Err(bad("particle indices are 1-based".to_string()));
        }
        let target = index - 1;
        if target >= layout.subsystem_count() {
            return Err(bad(format!(
                "particle {index} out of range for {} subsystem(s)",
                layout.subsystem_count()
            )));
        }
        if atoms.iter().any(|&(_, t)| t == target) {
            return Err(bad(format!("particle {index} referenced more than once")));
        }
        atoms.push((axis, target));
    }
    let mut observable: Option<Observable> = None;
    for (axis, target) in atoms {
        let next = Observable::pauli(axis, target, layout)?;
        observable = Some(match observable {
            None => next,
            Some(prev) => product_observable(&prev, &next, DEFAULT_EPS)?,
        });
    }
    Ok(observable.expect("spec has at least one atom"))
}

/// Names accepted by [`builtin`].
pub fn builtin_names() -> &'static [&'static str] {
    &["three-box", "hardy"]
}

pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "three-box" => Some(builtin_three_box()),
        "hardy" => Some(builtin_hardy_spins()),
        _ => None,
    }
}

/// A single particle coherently split over three boxes; boxes A and C are
/// opened at spacelike separation, the particle is not found in A and is
/// found in C. Two frames tell radically different collapse stories.
pub fn builtin_three_box() -> Scenario {
    let s = 3f64.sqrt().recip();
    let delta = |i: usize| -> Vec<Vec<[f64; 2]>> {
        (0..3)
            .map(|r| {
                (0..3)
                    .map(|c| [f64::from(u8::from(r == i && c == i)), 0.0])
                    .collect()
            })
            .collect()
    };
    let complement = |i: usize| -> Vec<Vec<[f64; 2]>> {
        (0..3)
            .map(|r| {
                (0..3)
                    .map(|c| [f64::from(u8::from(r == c && r != i)), 0.0])
                    .collect()
            })
            .collect()
    };
    let open = |i: usize| ObservableDocument::Explicit {
        branches: vec![
            BranchDocument {
                label: "found".to_string(),
                eigenvalue: 1.0,
                projector: delta(i),
            },
            BranchDocument {
                label: "not-found".to_string(),
                eigenvalue: 0.0,
                projector: complement(i),
            },
        ],
    };
    let doc = ScenarioDocument {
        name: "three-box".to_string(),
        dims: vec![3],
        basis_labels: Some(vec![vec![
            "A".to_string(),
            "B".to_string(),
            "C".to_string(),
        ]]),
        initial: vec![[s, 0.0], [s, 0.0], [s, 0.0]],
        normalize: false,
        events: vec![
            EventDocument {
                id: "A".to_string(),
                target: None,
                observable: open(0),
                forced_outcome: Some("not-found".to_string()),
            },
            EventDocument {
                id: "C".to_string(),
                target: None,
                observable: open(2),
                forced_outcome: Some("found".to_string()),
            },
        ],
        analyses: vec![AnalysisRequest::CompareOrderings {
            orderings: vec![
                vec!["A".to_string(), "C".to_string()],
                vec!["C".to_string(), "A".to_string()],
            ],
        }],
    };
    Scenario::from_document(&doc, DEFAULT_EPS).expect("built-in scenario is valid")
}

/// Two spin-1/2 particles pre-selected in a state with no down-down
/// component, post-selected by finding both x components down — with the full
/// battery of analyses the boundary pair supports.
pub fn builtin_hardy_spins() -> Scenario {
    let s = 3f64.sqrt().recip();
    let qubit_labels = || vec!["up".to_string(), "down".to_string()];
    let doc = ScenarioDocument {
        name: "hardy".to_string(),
        dims: vec![2, 2],
        basis_labels: Some(vec![qubit_labels(), qubit_labels()]),
        initial: vec![[s, 0.0], [s, 0.0], [s, 0.0], [0.0, 0.0]],
        normalize: false,
        events: vec![
            EventDocument {
                id: "S1".to_string(),
                target: Some(0),
                observable: ObservableDocument::Keyword("sigma_x".to_string()),
                forced_outcome: Some("-1".to_string()),
            },
            EventDocument {
                id: "S2".to_string(),
                target: Some(1),
                observable: ObservableDocument::Keyword("sigma_x".to_string()),
                forced_outcome: Some("-1".to_string()),
            },
        ],
        analyses: vec![
            AnalysisRequest::CompareOrderings {
                orderings: vec![
                    vec!["S1".to_string(), "S2".to_string()],
                    vec!["S2".to_string(), "S1".to_string()],
                ],
            },
            AnalysisRequest::Abl {
                observable: "z1".to_string(),
            },
            AnalysisRequest::Abl {
                observable: "z2".to_string(),
            },
            AnalysisRequest::Eor {
                observable: "z1".to_string(),
            },
            AnalysisRequest::Eor {
                observable: "z2".to_string(),
            },
            AnalysisRequest::CheckRules {
                a: "z1".to_string(),
                b: "z2".to_string(),
            },
            AnalysisRequest::WeakValue {
                operator: "z1".to_string(),
            },
            AnalysisRequest::WeakValue {
                operator: "z2".to_string(),
            },
            AnalysisRequest::WeakValue {
                operator: "z1z2".to_string(),
            },
            AnalysisRequest::WeakMc {
                operator: "z1z2".to_string(),
                config: WeakMeasurementConfig::new(0.05, 1.0, 100_000, 42),
            },
        ],
    };
    Scenario::from_document(&doc, DEFAULT_EPS).expect("built-in scenario is valid")
}

/// Semantic equality: same name, layout, labels, analyses; amplitudes,
/// eigenvalues, and projector entries equal within `eps`. This is the
/// round-trip contract — serialization must preserve exactly this.
pub fn semantically_equal(a: &Scenario, b: &Scenario, eps: f64) -> bool {
    if a.name() != b.name()
        || a.layout() != b.layout()
        || a.basis_labels() != b.basis_labels()
        || a.analyses() != b.analyses()
        || a.events().len() != b.events().len()
    {
        return false;
    }
    let states_close = a
        .initial()
        .amplitudes()
        .iter()
        .zip(b.initial().amplitudes())
        .all(|(x, y)| (x - y).norm() <= eps);
    if !states_close {
        return false;
    }
    a.events().iter().zip(b.events()).all(|(ea, eb)| {
        ea.id == eb.id
            && ea.forced_outcome == eb.forced_outcome
            && ea.observable.branches().len() == eb.observable.branches().len()
            && ea
                .observable
                .branches()
                .iter()
                .zip(eb.observable.branches())
                .all(|(ba, bb)| {
                    ba.label == bb.label
                        && (ba.eigenvalue - bb.eigenvalue).abs() <= eps
                        && ba
                            .projector
                            .sub(&bb.projector)
                            .map(|d| d.max_abs() <= eps)
                            .unwrap_or(false)
                })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_three_box_matches_the_construction() {
        let scenario = builtin_three_box();
        assert_eq!(scenario.name(), "three-box");
        assert_eq!(scenario.layout().dims(), &[3]);
        let s = 3f64.sqrt().recip();
        for amp in scenario.initial().amplitudes() {
            assert_abs_diff_eq!(amp.re, s, epsilon = 1e-12);
        }
        assert_eq!(scenario.events().len(), 2);
        let orderings = scenario.comparison_orderings().unwrap();
        assert_eq!(orderings.len(), 2);
        assert_eq!(orderings[0].sequence(), ["A", "C"]);
        // Post-selection: the particle ends up in box C.
        let tsv = scenario.two_state_vector(DEFAULT_EPS).unwrap();
        let want = Ket::basis_state(scenario.layout().clone(), 2).unwrap();
        assert!(tsv.post().componentwise_distance_up_to_phase(&want).unwrap() < 1e-12);
    }

    #[test]
    fn builtin_hardy_matches_the_construction() {
        let scenario = builtin_hardy_spins();
        assert_eq!(scenario.layout().dims(), &[2, 2]);
        let s = 3f64.sqrt().recip();
        let want = [s, s, s, 0.0];
        for (amp, w) in scenario.initial().amplitudes().iter().zip(want) {
            assert_abs_diff_eq!(amp.re, w, epsilon = 1e-12);
        }
        // The collapsed post-selection is the x-down product state, up to a
        // global phase.
        let tsv = scenario.two_state_vector(DEFAULT_EPS).unwrap();
        let direct =
            Ket::from_real(scenario.layout().clone(), &[0.5, -0.5, -0.5, 0.5]).unwrap();
        assert!(tsv.post().componentwise_distance_up_to_phase(&direct).unwrap() < 1e-12);
        // And the boundary overlap magnitude is 1/(2 sqrt 3).
        assert_abs_diff_eq!(tsv.overlap().norm(), 0.5 / 3f64.sqrt(), epsilon = 1e-12);
        assert_eq!(scenario.analyses().len(), 10);
    }

    #[test]
    fn builtins_round_trip_through_json() {
        for scenario in [builtin_three_box(), builtin_hardy_spins()] {
            let json = scenario.to_json();
            let reloaded = load_scenario_str(&json, DEFAULT_EPS).unwrap();
            assert!(
                semantically_equal(&scenario, &reloaded, 1e-12),
                "{} did not round-trip",
                scenario.name()
            );
        }
    }

    #[test]
    fn builtins_validate_cleanly() {
        for scenario in [builtin_three_box(), builtin_hardy_spins()] {
            let report = validate_document(scenario.document(), DEFAULT_EPS);
            assert!(report.passed(), "{}: {report}", scenario.name());
        }
    }

    #[test]
    fn unnormalized_input_requires_the_opt_in() {
        let mut doc = builtin_three_box().document().clone();
        doc.initial = vec![[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]];
        let err = Scenario::from_document(&doc, DEFAULT_EPS).unwrap_err();
        assert!(
            err.to_string().contains("normalize"),
            "error should point at the flag: {err}"
        );
        doc.normalize = true;
        let scenario = Scenario::from_document(&doc, DEFAULT_EPS).unwrap();
        assert_abs_diff_eq!(scenario.initial().norm_sqr(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            scenario.initial().amplitudes()[0].re,
            3f64.sqrt().recip(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn duplicate_projectors_fail_validation_naming_the_event() {
        let mut doc = builtin_three_box().document().clone();
        // Replace event C's branches with {P_A, P_A}.
        let ObservableDocument::Explicit { branches } = &mut doc.events[1].observable else {
            panic!("three-box uses explicit branches");
        };
        branches[1].projector = branches[0].projector.clone();
        let report = validate_document(&doc, DEFAULT_EPS);
        let text = report.to_string();
        assert!(text.contains("events[1] ('C')"), "got: {text}");
        assert!(text.contains("not complete"), "got: {text}");
        assert!(text.contains("not orthogonal"), "got: {text}");
    }

    #[test]
    fn located_messages_for_common_mistakes() {
        let mut doc = builtin_hardy_spins().document().clone();
        doc.events[0].target = Some(5);
        doc.events[1].forced_outcome = Some("sideways".to_string());
        doc.analyses.push(AnalysisRequest::Abl {
            observable: "z9".to_string(),
        });
        let report = validate_document(&doc, DEFAULT_EPS);
        let text = report.to_string();
        assert!(text.contains("events[0] ('S1')"), "got: {text}");
        assert!(text.contains("events[1] ('S2')"), "got: {text}");
        assert!(text.contains("'sideways'"), "got: {text}");
        assert!(text.contains("analyses[10]"), "got: {text}");
    }

    #[test]
    fn ordering_analysis_must_be_a_permutation() {
        let mut doc = builtin_three_box().document().clone();
        doc.analyses = vec![AnalysisRequest::CompareOrderings {
            orderings: vec![
                vec!["A".to_string(), "C".to_string()],
                vec!["A".to_string(), "A".to_string()],
            ],
        }];
        let report = validate_document(&doc, DEFAULT_EPS);
        assert!(
            report.to_string().contains("orderings[1]"),
            "got: {report}"
        );
    }

    #[test]
    fn parse_error_is_distinct_from_validation_error() {
        let err = load_scenario_str("{ not json", DEFAULT_EPS).unwrap_err();
        assert!(matches!(err, Error::ScenarioParse(_)), "got {err}");
        let err = load_scenario_str("{\"name\": \"x\"}", DEFAULT_EPS).unwrap_err();
        assert!(matches!(err, Error::ScenarioParse(_)), "got {err}");
    }

    #[test]
    fn operator_specs_parse_to_the_expected_observables() {
        let layout = SubsystemLayout::qubits(2).unwrap();
        let z1 = parse_operator_spec("z1", &layout).unwrap();
        assert_eq!(z1.branches().len(), 2);
        let lifted = crate::hilbert::lift_to_subsystem(&Operator::pauli_z(), 0, &layout).unwrap();
        assert!(z1.to_operator().sub(&lifted).unwrap().max_abs() < 1e-14);

        let x2 = parse_operator_spec("X2", &layout).unwrap();
        let lifted = crate::hilbert::lift_to_subsystem(&Operator::pauli_x(), 1, &layout).unwrap();
        assert!(x2.to_operator().sub(&lifted).unwrap().max_abs() < 1e-14);

        let zz = parse_operator_spec("z1z2", &layout).unwrap();
        assert_eq!(zz.branches().len(), 2);
        let want = crate::hilbert::lift_to_subsystem(&Operator::pauli_z(), 0, &layout)
            .unwrap()
            .matmul(&crate::hilbert::lift_to_subsystem(&Operator::pauli_z(), 1, &layout).unwrap())
            .unwrap();
        assert!(zz.to_operator().sub(&want).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn bad_operator_specs_are_rejected_with_reasons() {
        let layout = SubsystemLayout::qubits(2).unwrap();
        for spec in ["", "z", "z0", "z3", "w1", "z1z1", "z1 z2 extra!"] {
            let err = parse_operator_spec(spec, &layout).unwrap_err();
            assert!(
                matches!(err, Error::BadOperatorSpec { .. }),
                "spec '{spec}' gave {err}"
            );
        }
    }

    #[test]
    fn unknown_builtin_is_none() {
        assert!(builtin("five-box").is_none());
        assert_eq!(builtin_names().len(), 2);
        for name in builtin_names() {
            assert!(builtin(name).is_some());
        }
    }
}
