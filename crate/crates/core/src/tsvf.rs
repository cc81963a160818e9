//! Two-state-vector analysis: conditional probabilities for measurements
//! sandwiched between a pre- and a post-selection, elements of reality, and
//! the combination rules that fail for such systems.
//!
//! The conditional probability of outcome `a` of an intermediate projective
//! measurement, given pre-selected state `|psi>` and post-selected state
//! `|phi>`, is
//!
//! ```text
//! P(a) = |<phi| P_a |psi>|^2 / sum_b |<phi| P_b |psi>|^2
//! ```
//!
//! An outcome whose conditional probability is 1 (within a certainty
//! tolerance) is an *element of reality*: the measurement, had it been
//! performed, would certainly have shown it. Famously, elements of reality of
//! pre- and post-selected systems do not compose: `A = a` and `B = b` can both
//! be certain while the joint outcome `(a, b)` is impossible (the "and rule"
//! fails), and while the product observable `A.B` is certain to show something
//! other than `a.b` (the product rule fails). This module computes all three
//! pieces and reports exactly which rules hold.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{apply, inner_product, Ket, SubsystemLayout};
use crate::measurement::{Branch, Observable};

/// EoR detection threshold: an outcome counts as certain when its conditional
/// probability is at least `1 - tolerance`. Deliberately far looser than the
/// algebraic epsilon — it separates floating-point noise from genuine
/// probabilistic spread.
pub const DEFAULT_CERTAINTY_TOLERANCE: f64 = 1e-9;

/// A system described from both temporal boundaries: pre-selected `|psi>`
/// evolving forward, post-selected `|phi>` evolving backward.
///
/// Orthogonal pairs are constructible — whether analysis is possible depends
/// on the intermediate measurement, so each query checks its own denominator.
#[derive(Debug, Clone)]
pub struct TwoStateVector {
    pre: Ket,
    post: Ket,
}

impl TwoStateVector {
    pub fn new(pre: Ket, post: Ket, eps: f64) -> Result<Self> {
        if pre.layout() != post.layout() {
            return Err(Error::LayoutMismatch {
                left: pre.layout().to_string(),
                right: post.layout().to_string(),
            });
        }
        for state in [&pre, &post] {
            if !state.is_normalized(eps) {
                return Err(Error::NotNormalized {
                    norm_sqr: state.norm_sqr(),
                });
            }
        }
        Ok(Self { pre, post })
    }

    pub fn pre(&self) -> &Ket {
        &self.pre
    }

    pub fn post(&self) -> &Ket {
        &self.post
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.pre.layout()
    }

    /// `<post|pre>`.
    pub fn overlap(&self) -> Complex64 {
        inner_product(&self.post, &self.pre).expect("layouts checked at construction")
    }
}

/// Conditional outcome distribution for one intermediate measurement, with
/// the transition amplitudes `<phi|P_a|psi>` it was derived from.
#[derive(Debug, Clone)]
pub struct AblDistribution {
    entries: Vec<(String, f64)>,
    amplitudes: Vec<(String, Complex64)>,
    denominator: f64,
}

impl AblDistribution {
    /// Probabilities in branch order.
    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    /// Transition amplitudes in branch order. For a grouped product
    /// distribution these are coherent sums over the group.
    pub fn amplitudes(&self) -> &[(String, Complex64)] {
        &self.amplitudes
    }

    /// `sum_b |<phi|P_b|psi>|^2` — the reachability weight of the
    /// post-selection through this measurement.
    pub fn denominator(&self) -> f64 {
        self.denominator
    }

    pub fn probability(&self, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, p)| p)
    }

    pub fn amplitude(&self, label: &str) -> Option<Complex64> {
        self.amplitudes
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, a)| a)
    }
}

/// Conditional probability of each outcome of `obs`, given the two boundary
/// states. Errors when no outcome connects them (vanishing denominator).
pub fn abl_distribution(
    tsv: &TwoStateVector,
    obs: &Observable,
    eps: f64,
) -> Result<AblDistribution> {
    if tsv.layout() != obs.layout() {
        return Err(Error::LayoutMismatch {
            left: tsv.layout().to_string(),
            right: obs.layout().to_string(),
        });
    }
    let amplitudes = obs
        .branches()
        .iter()
        .map(|b| {
            let projected = apply(&b.projector, tsv.pre())?;
            Ok((b.label.clone(), inner_product(tsv.post(), &projected)?))
        })
        .collect::<Result<Vec<(String, Complex64)>>>()?;
    let denominator: f64 = amplitudes.iter().map(|(_, a)| a.norm_sqr()).sum();
    if denominator <= eps {
        return Err(Error::UnreachablePostSelection { total: denominator });
    }
    let entries = amplitudes
        .iter()
        .map(|(label, a)| (label.clone(), a.norm_sqr() / denominator))
        .collect();
    Ok(AblDistribution {
        entries,
        amplitudes,
        denominator,
    })
}

/// An outcome the intermediate measurement was certain to produce.
#[derive(Debug, Clone)]
pub struct ElementOfReality {
    pub label: String,
    pub eigenvalue: f64,
    pub probability: f64,
}

/// The outcome of `obs` with conditional probability at least
/// `1 - tolerance`, if any.
pub fn element_of_reality(
    tsv: &TwoStateVector,
    obs: &Observable,
    tolerance: f64,
    eps: f64,
) -> Result<Option<ElementOfReality>> {
    let dist = abl_distribution(tsv, obs, eps)?;
    eor_from_entries(dist.entries(), obs, tolerance)
}

fn eor_from_entries(
    entries: &[(String, f64)],
    obs: &Observable,
    tolerance: f64,
) -> Result<Option<ElementOfReality>> {
    if !(0.0..1.0).contains(&tolerance) {
        return Err(Error::BadConfig(format!(
            "certainty tolerance must lie in [0, 1), got {tolerance}"
        )));
    }
    let best = entries
        .iter()
        .filter(|&&(_, p)| p >= 1.0 - tolerance)
        .max_by(|a, b| a.1.total_cmp(&b.1));
    Ok(best.map(|(label, p)| ElementOfReality {
        label: label.clone(),
        eigenvalue: obs
            .branch(label)
            .map(|b| b.eigenvalue)
            .unwrap_or(f64::NAN),
        probability: *p,
    }))
}

fn check_cross_commutation(a: &Observable, b: &Observable, eps: f64) -> Result<()> {
    if a.layout() != b.layout() {
        return Err(Error::LayoutMismatch {
            left: a.layout().to_string(),
            right: b.layout().to_string(),
        });
    }
    let mut worst = 0.0f64;
    for pa in a.branches() {
        for pb in b.branches() {
            worst = worst.max(pa.projector.commutator_max_abs(&pb.projector)?);
        }
    }
    if worst > eps {
        return Err(Error::BadConfig(format!(
            "observables do not commute (max commutator entry {worst:.3e}); \
             joint and product analyses require compatible observables"
        )));
    }
    Ok(())
}

/// The fine-grained simultaneous measurement of two compatible observables:
/// one branch per outcome pair, labeled `"a,b"`, carrying the eigenvalue
/// product and the projector `P_a Q_b`.
pub fn joint_observable(a: &Observable, b: &Observable, eps: f64) -> Result<Observable> {
    check_cross_commutation(a, b, eps)?;
    let mut branches = Vec::with_capacity(a.branches().len() * b.branches().len());
    for pa in a.branches() {
        for pb in b.branches() {
            branches.push(Branch::new(
                format!("{},{}", pa.label, pb.label),
                pa.eigenvalue * pb.eigenvalue,
                pa.projector.matmul(&pb.projector)?,
            ));
        }
    }
    Observable::new(a.layout().clone(), branches, eps)
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn format_eigenvalue(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{:+}", v as i64)
    } else {
        format!("{v:+}")
    }
}

/// The degenerate observable `A.B`: joint branches grouped by eigenvalue
/// product (rounded to 12 decimals), labeled by the product value, ordered by
/// descending eigenvalue.
pub fn product_observable(a: &Observable, b: &Observable, eps: f64) -> Result<Observable> {
    let joint = joint_observable(a, b, eps)?;
    let mut groups: Vec<(f64, crate::hilbert::Operator)> = Vec::new();
    for branch in joint.branches() {
        let value = round12(branch.eigenvalue);
        match groups.iter_mut().find(|(v, _)| *v == value) {
            Some((_, projector)) => *projector = projector.add(&branch.projector)?,
            None => groups.push((value, branch.projector.clone())),
        }
    }
    groups.sort_by(|a, b| b.0.total_cmp(&a.0));
    let branches = groups
        .into_iter()
        .map(|(value, projector)| Branch::new(format_eigenvalue(value), value, projector))
        .collect();
    Observable::new(a.layout().clone(), branches, eps)
}

/// Everything the combination-rule checks looked at.
#[derive(Debug, Clone)]
pub struct RuleCheckReport {
    pub eor_a: Option<ElementOfReality>,
    pub eor_b: Option<ElementOfReality>,
    /// Conditional distribution over outcome pairs of the fine-grained joint
    /// measurement.
    pub joint: AblDistribution,
    /// Distribution over eigenvalue products, obtained by *grouping the joint
    /// distribution's probabilities*: the statistics of measuring both
    /// observables and multiplying the recorded results. This is not the same
    /// experiment as a single measurement of the degenerate product
    /// observable, whose conditional distribution [`abl_distribution`]
    /// reports; for a pre- and post-selected system the two genuinely differ.
    /// The retained amplitudes are the coherent per-group sums.
    pub product: AblDistribution,
    /// The certain eigenvalue product, if any, per the grouped distribution.
    pub product_eor: Option<ElementOfReality>,
    /// If `A = a` and `B = b` are both certain, is the pair `(a, b)` certain
    /// under the joint measurement? (Vacuously true when an EoR is missing.)
    pub and_rule_holds: bool,
    /// If `A = a` and `B = b` are both certain, is `A.B = a.b` certain?
    /// (Vacuously true when an EoR is missing.)
    pub product_rule_holds: bool,
}

fn rule_check(
    tsv: &TwoStateVector,
    a: &Observable,
    b: &Observable,
    tolerance: f64,
    eps: f64,
) -> Result<RuleCheckReport> {
    let eor_a = element_of_reality(tsv, a, tolerance, eps)?;
    let eor_b = element_of_reality(tsv, b, tolerance, eps)?;
    let joint_obs = joint_observable(a, b, eps)?;
    let joint = abl_distribution(tsv, &joint_obs, eps)?;

    // Group the joint outcomes by eigenvalue product.
    let mut groups: Vec<(f64, f64, Complex64)> = Vec::new();
    for (branch, ((label, p), (alabel, amp))) in joint_obs
        .branches()
        .iter()
        .zip(joint.entries().iter().zip(joint.amplitudes()))
    {
        debug_assert_eq!(&branch.label, label);
        debug_assert_eq!(&branch.label, alabel);
        let value = round12(branch.eigenvalue);
        match groups.iter_mut().find(|(v, _, _)| *v == value) {
            Some((_, gp, ga)) => {
                *gp += p;
                *ga += amp;
            }
            None => groups.push((value, *p, *amp)),
        }
    }
    groups.sort_by(|x, y| y.0.total_cmp(&x.0));
    let product = AblDistribution {
        entries: groups
            .iter()
            .map(|&(v, p, _)| (format_eigenvalue(v), p))
            .collect(),
        amplitudes: groups
            .iter()
            .map(|&(v, _, a)| (format_eigenvalue(v), a))
            .collect(),
        denominator: joint.denominator(),
    };
    let product_eor = {
        if !(0.0..1.0).contains(&tolerance) {
            return Err(Error::BadConfig(format!(
                "certainty tolerance must lie in [0, 1), got {tolerance}"
            )));
        }
        groups
            .iter()
            .filter(|&&(_, p, _)| p >= 1.0 - tolerance)
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|&(v, p, _)| ElementOfReality {
                label: format_eigenvalue(v),
                eigenvalue: v,
                probability: p,
            })
    };

    let (and_rule_holds, product_rule_holds) = match (&eor_a, &eor_b) {
        (Some(ea), Some(eb)) => {
            let pair = format!("{},{}", ea.label, eb.label);
            let and_holds = joint.probability(&pair).unwrap_or(0.0) >= 1.0 - tolerance;
            let expected = round12(ea.eigenvalue * eb.eigenvalue);
            let product_holds = product_eor
                .as_ref()
                .is_some_and(|pe| (pe.eigenvalue - expected).abs() <= 1e-9);
            (and_holds, product_holds)
        }
        _ => (true, true),
    };

    Ok(RuleCheckReport {
        eor_a,
        eor_b,
        joint,
        product,
        product_eor,
        and_rule_holds,
        product_rule_holds,
    })
}

/// Do certain individual outcomes imply a certain joint outcome?
pub fn and_rule_check(
    tsv: &TwoStateVector,
    a: &Observable,
    b: &Observable,
    tolerance: f64,
    eps: f64,
) -> Result<RuleCheckReport> {
    rule_check(tsv, a, b, tolerance, eps)
}

/// Do certain individual outcomes imply a certain product outcome?
pub fn product_rule_check(
    tsv: &TwoStateVector,
    a: &Observable,
    b: &Observable,
    tolerance: f64,
    eps: f64,
) -> Result<RuleCheckReport> {
    rule_check(tsv, a, b, tolerance, eps)
}
