//! Serializable report envelopes and their plain-text renderings.
//!
//! Every report echoes the tool version and the numeric tolerance in effect,
//! and Monte Carlo reports echo the full sampling configuration, so that any
//! number in a report can be reproduced from the report alone. JSON output is
//! deterministic: field order is fixed by the struct definitions and floats
//! are serialized exactly.

use num_complex::Complex64;
use serde::Serialize;
use tsvf_core::frames::{Ordering, OrderingComparison, OrderingRun};
use tsvf_core::tsvf::{AblDistribution, ElementOfReality, RuleCheckReport};
use tsvf_core::weak::{WeakMeasurementConfig, WeakRunReport};

pub const TOOL: &str = "tsvf";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Common envelope wrapped around every subcommand body.
#[derive(Serialize)]
pub struct Report<B: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    /// Numeric tolerance in effect (default 1e-12, overridable via `TSVF_EPS`).
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(flatten)]
    pub body: B,
}

impl<B: Serialize + RenderText> Report<B> {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        line(&mut out, 0, format!("{TOOL} {VERSION} (eps {})", sig6(self.eps)));
        if let Some(name) = &self.scenario {
            line(&mut out, 0, format!("scenario: {name}"));
        }
        self.body.render(&mut out);
        out
    }
}

/// Plain-text rendering; numbers are shown to six significant digits.
pub trait RenderText {
    fn render(&self, out: &mut String);
}

/// Format to six significant digits, falling back to scientific notation for
/// extreme magnitudes.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    if !(-7..=9).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude) as usize;
    format!("{x:.decimals$}")
}

fn sig6_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{} {} {}i", sig6(z.re), sign, sig6(z.im.abs()))
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn line(out: &mut String, indent: usize, text: impl AsRef<str>) {
    for _ in 0..indent {
        out.push_str("  ");
    }
    out.push_str(text.as_ref());
    out.push('\n');
}

// ---------------------------------------------------------------------------
// list
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct ListBody {
    pub builtins: Vec<BuiltinSummary>,
}

#[derive(Serialize)]
pub struct BuiltinSummary {
    pub name: String,
    pub dims: Vec<usize>,
    pub events: Vec<String>,
    pub analyses: usize,
}

impl RenderText for ListBody {
    fn render(&self, out: &mut String) {
        line(out, 0, "built-in scenarios:");
        for b in &self.builtins {
            line(
                out,
                1,
                format!(
                    "{} (dims {:?}, events [{}], {} stored analyses)",
                    b.name,
                    b.dims,
                    b.events.join(", "),
                    b.analyses
                ),
            );
        }
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct TrajectoryPoint {
    /// Event measured to reach this state; `null` for the initial state.
    pub event: Option<String>,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize)]
pub struct SingleRunBody {
    pub ordering: Vec<String>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub step_probabilities: Vec<f64>,
    pub joint_probability: f64,
}

pub fn single_run_body(run: &OrderingRun) -> SingleRunBody {
    SingleRunBody {
        ordering: run.ordering.sequence().to_vec(),
        trajectory: run
            .trajectory
            .iter()
            .map(|tagged| TrajectoryPoint {
                event: tagged.event_id.clone(),
                amplitudes: tagged.state.amplitudes().iter().copied().map(pair).collect(),
            })
            .collect(),
        step_probabilities: run.step_probabilities.clone(),
        joint_probability: run.joint_probability,
    }
}

impl RenderText for SingleRunBody {
    fn render(&self, out: &mut String) {
        line(out, 0, format!("ordering: [{}]", self.ordering.join(", ")));
        line(out, 0, "trajectory:");
        for point in &self.trajectory {
            let label = match &point.event {
                None => "initial".to_string(),
                Some(e) => format!("after {e}"),
            };
            let amps: Vec<String> = point
                .amplitudes
                .iter()
                .map(|&[re, im]| sig6_complex(Complex64::new(re, im)))
                .collect();
            line(out, 1, format!("{label}: ({})", amps.join(", ")));
        }
        let steps: Vec<String> = self.step_probabilities.iter().map(|p| sig6(*p)).collect();
        line(out, 0, format!("step probabilities: [{}]", steps.join(", ")));
        line(out, 0, format!("joint probability: {}", sig6(self.joint_probability)));
    }
}

#[derive(Serialize)]
pub struct OverlapRow {
    pub depth: usize,
    pub first_ordering: usize,
    pub second_ordering: usize,
    pub overlap: f64,
    /// Whether both prefixes have measured the same set of events.
    pub same_events: bool,
}

#[derive(Serialize)]
pub struct AssignmentRow {
    pub assignment: String,
    pub probability: f64,
}

#[derive(Serialize)]
pub struct OutcomeDistributionRow {
    pub ordering: Vec<String>,
    pub entries: Vec<AssignmentRow>,
}

#[derive(Serialize)]
pub struct ComparisonBody {
    pub orderings: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint_probabilities: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_overlap: Option<f64>,
    pub intermediate_overlaps: Vec<OverlapRow>,
    pub all_commute: bool,
    pub distributions_match: bool,
    pub ordering_invariant: bool,
    pub warnings: Vec<String>,
    pub outcome_distributions: Vec<OutcomeDistributionRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<SingleRunBody>>,
}

pub fn comparison_body(cmp: &OrderingComparison, orderings: &[Ordering]) -> ComparisonBody {
    ComparisonBody {
        orderings: orderings.iter().map(|o| o.sequence().to_vec()).collect(),
        joint_probabilities: cmp.joint_probabilities.clone(),
        final_overlap: cmp.final_overlap,
        intermediate_overlaps: cmp
            .intermediate_overlaps
            .iter()
            .map(|o| OverlapRow {
                depth: o.depth,
                first_ordering: o.first,
                second_ordering: o.second,
                overlap: o.overlap,
                same_events: o.same_multiset,
            })
            .collect(),
        all_commute: cmp.all_commute,
        distributions_match: cmp.distributions_match,
        ordering_invariant: cmp.ordering_invariant,
        warnings: cmp.warnings.clone(),
        outcome_distributions: cmp
            .outcome_distributions
            .iter()
            .map(|dist| OutcomeDistributionRow {
                ordering: dist.ordering.sequence().to_vec(),
                entries: dist
                    .entries
                    .iter()
                    .map(|(assignment, probability)| AssignmentRow {
                        assignment: assignment.clone(),
                        probability: *probability,
                    })
                    .collect(),
            })
            .collect(),
        runs: cmp
            .runs
            .as_ref()
            .map(|runs| runs.iter().map(single_run_body).collect()),
    }
}

impl RenderText for ComparisonBody {
    fn render(&self, out: &mut String) {
        line(out, 0, format!("orderings compared: {}", self.orderings.len()));
        for (i, ordering) in self.orderings.iter().enumerate() {
            let joint = self
                .joint_probabilities
                .as_ref()
                .map(|joints| format!(" joint probability {}", sig6(joints[i])))
                .unwrap_or_default();
            line(out, 1, format!("#{i}: [{}]{joint}", ordering.join(", ")));
        }
        if let Some(overlap) = self.final_overlap {
            line(out, 0, format!("final overlap: {}", sig6(overlap)));
        }
        if !self.intermediate_overlaps.is_empty() {
            line(out, 0, "intermediate overlaps:");
            for row in &self.intermediate_overlaps {
                line(
                    out,
                    1,
                    format!(
                        "depth {} (#{} vs #{}{}): {}",
                        row.depth,
                        row.first_ordering,
                        row.second_ordering,
                        if row.same_events { ", same events" } else { "" },
                        sig6(row.overlap)
                    ),
                );
            }
        }
        line(out, 0, format!("all events commute: {}", self.all_commute));
        line(out, 0, format!("outcome distributions match: {}", self.distributions_match));
        line(out, 0, format!("ordering invariant: {}", self.ordering_invariant));
        for warning in &self.warnings {
            line(out, 0, format!("warning: {warning}"));
        }
        for dist in &self.outcome_distributions {
            line(out, 0, format!("outcomes under [{}]:", dist.ordering.join(", ")));
            for entry in &dist.entries {
                line(out, 1, format!("{}: {}", entry.assignment, sig6(entry.probability)));
            }
        }
        if let Some(runs) = &self.runs {
            for run in runs {
                run.render(out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// abl / eor / check-rules
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct AblRow {
    pub outcome: String,
    pub probability: f64,
    pub amplitude: [f64; 2],
}

pub fn abl_rows(dist: &AblDistribution) -> Vec<AblRow> {
    dist.entries()
        .iter()
        .map(|(label, probability)| AblRow {
            outcome: label.clone(),
            probability: *probability,
            amplitude: pair(dist.amplitude(label).expect("entry label resolves")),
        })
        .collect()
}

fn render_abl_rows(rows: &[AblRow], out: &mut String) {
    for row in rows {
        line(
            out,
            1,
            format!(
                "{}: {} (amplitude {})",
                row.outcome,
                sig6(row.probability),
                sig6_complex(Complex64::new(row.amplitude[0], row.amplitude[1]))
            ),
        );
    }
}

#[derive(Serialize)]
pub struct AblBody {
    pub observable: String,
    pub entries: Vec<AblRow>,
    /// Sum of squared moduli of the per-outcome amplitudes (the normalizer of
    /// the conditional distribution).
    pub denominator: f64,
}

impl RenderText for AblBody {
    fn render(&self, out: &mut String) {
        line(out, 0, format!("observable: {}", self.observable));
        line(out, 0, "conditional probabilities:");
        render_abl_rows(&self.entries, out);
        line(out, 0, format!("denominator: {}", sig6(self.denominator)));
    }
}

#[derive(Serialize)]
pub struct EorRow {
    pub outcome: String,
    pub eigenvalue: f64,
    pub probability: f64,
}

pub fn eor_row(e: &ElementOfReality) -> EorRow {
    EorRow {
        outcome: e.label.clone(),
        eigenvalue: e.eigenvalue,
        probability: e.probability,
    }
}

fn describe_eor(e: &Option<EorRow>) -> String {
    match e {
        Some(e) => format!(
            "outcome {} (eigenvalue {}, probability {})",
            e.outcome,
            sig6(e.eigenvalue),
            sig6(e.probability)
        ),
        None => "none".to_string(),
    }
}

#[derive(Serialize)]
pub struct EorBody {
    pub observable: String,
    pub tolerance: f64,
    pub element: Option<EorRow>,
    pub entries: Vec<AblRow>,
}

impl RenderText for EorBody {
    fn render(&self, out: &mut String) {
        line(out, 0, format!("observable: {}", self.observable));
        line(out, 0, format!("certainty tolerance: {}", sig6(self.tolerance)));
        line(out, 0, format!("element of reality: {}", describe_eor(&self.element)));
        line(out, 0, "conditional probabilities:");
        render_abl_rows(&self.entries, out);
    }
}

#[derive(Serialize)]
pub struct RulesBody {
    pub a: String,
    pub b: String,
    pub tolerance: f64,
    pub eor_a: Option<EorRow>,
    pub eor_b: Option<EorRow>,
    /// Conditional distribution over outcome pairs of the joint measurement.
    pub joint: Vec<AblRow>,
    /// Distribution over eigenvalue products obtained by grouping the joint
    /// probabilities — measure both, multiply the results.
    pub product: Vec<AblRow>,
    pub product_eor: Option<EorRow>,
    pub and_rule_holds: bool,
    pub product_rule_holds: bool,
}

pub fn rules_body(a: &str, b: &str, tolerance: f64, report: &RuleCheckReport) -> RulesBody {
    RulesBody {
        a: a.to_string(),
        b: b.to_string(),
        tolerance,
        eor_a: report.eor_a.as_ref().map(eor_row),
        eor_b: report.eor_b.as_ref().map(eor_row),
        joint: abl_rows(&report.joint),
        product: abl_rows(&report.product),
        product_eor: report.product_eor.as_ref().map(eor_row),
        and_rule_holds: report.and_rule_holds,
        product_rule_holds: report.product_rule_holds,
    }
}

impl RenderText for RulesBody {
    fn render(&self, out: &mut String) {
        line(out, 0, format!("observables: {} and {}", self.a, self.b));
        line(out, 0, format!("element of reality for {}: {}", self.a, describe_eor(&self.eor_a)));
        line(out, 0, format!("element of reality for {}: {}", self.b, describe_eor(&self.eor_b)));
        line(out, 0, "joint outcomes:");
        render_abl_rows(&self.joint, out);
        line(out, 0, "eigenvalue products (joint statistics, grouped):");
        render_abl_rows(&self.product, out);
        line(out, 0, format!("product element of reality: {}", describe_eor(&self.product_eor)));
        line(out, 0, format!("and rule holds: {}", self.and_rule_holds));
        line(out, 0, format!("product rule holds: {}", self.product_rule_holds));
    }
}

// ---------------------------------------------------------------------------
// weak / weak-mc
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct ExactPointer {
    pub g: f64,
    pub delta: f64,
    /// Exact mean of the post-selected pointer density, divided by `g`.
    pub mean_over_g: f64,
    pub std_dev: f64,
    pub post_selection_rate: f64,
    pub disturbance_fidelity: f64,
}

#[derive(Serialize)]
pub struct WeakBody {
    pub operator: String,
    pub weak_value: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactPointer>,
}

impl RenderText for WeakBody {
    fn render(&self, out: &mut String) {
        line(out, 0, format!("operator: {}", self.operator));
        line(
            out,
            0,
            format!(
                "weak value: {}",
                sig6_complex(Complex64::new(self.weak_value[0], self.weak_value[1]))
            ),
        );
        if let Some(exact) = &self.exact {
            line(
                out,
                0,
                format!("exact pointer model (g {}, delta {}):", sig6(exact.g), sig6(exact.delta)),
            );
            line(out, 1, format!("mean shift / g: {}", sig6(exact.mean_over_g)));
            line(out, 1, format!("std dev: {}", sig6(exact.std_dev)));
            line(out, 1, format!("post-selection rate: {}", sig6(exact.post_selection_rate)));
            line(out, 1, format!("disturbance fidelity: {}", sig6(exact.disturbance_fidelity)));
        }
    }
}

#[derive(Serialize)]
pub struct WeakMcBody {
    pub operator: String,
    pub config: WeakMeasurementConfig,
    pub estimate: f64,
    pub standard_error: f64,
    pub exact_mean_over_g: f64,
    pub weak_value: [f64; 2],
    pub post_selection_rate: f64,
    pub disturbance_fidelity: f64,
    pub shard_sizes: Vec<u64>,
}

pub fn weak_mc_body(
    operator: &str,
    config: &WeakMeasurementConfig,
    report: &WeakRunReport,
) -> WeakMcBody {
    WeakMcBody {
        operator: operator.to_string(),
        config: config.clone(),
        estimate: report.estimate,
        standard_error: report.standard_error,
        exact_mean_over_g: report.exact_mean_over_g,
        weak_value: pair(report.target_weak_value),
        post_selection_rate: report.post_selection_rate,
        disturbance_fidelity: report.disturbance_fidelity,
        shard_sizes: report.shard_sizes.clone(),
    }
}

impl RenderText for WeakMcBody {
    fn render(&self, out: &mut String) {
        line(out, 0, format!("operator: {}", self.operator));
        line(
            out,
            0,
            format!(
                "config: g {}, delta {}, samples {}, seed {}, grid {}, shards {}",
                sig6(self.config.g),
                sig6(self.config.delta),
                self.config.post_samples,
                self.config.seed,
                self.config.grid_points,
                self.config.shards
            ),
        );
        line(out, 0, format!("estimated mean shift / g: {}", sig6(self.estimate)));
        line(out, 0, format!("standard error: {}", sig6(self.standard_error)));
        line(out, 0, format!("exact mean shift / g: {}", sig6(self.exact_mean_over_g)));
        line(
            out,
            0,
            format!(
                "weak value: {}",
                sig6_complex(Complex64::new(self.weak_value[0], self.weak_value[1]))
            ),
        );
        line(out, 0, format!("post-selection rate: {}", sig6(self.post_selection_rate)));
        line(out, 0, format!("disturbance fidelity: {}", sig6(self.disturbance_fidelity)));
        let shards: Vec<String> = self.shard_sizes.iter().map(|s| s.to_string()).collect();
        line(out, 0, format!("shard sizes: [{}]", shards.join(", ")));
    }
}
