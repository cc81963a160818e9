//! Projective measurement: observables as labeled projector decompositions,
//! Born-rule statistics, collapse, and forced-outcome sequences.
//!
//! An [`Observable`] is a complete set of pairwise-orthogonal projectors, each
//! carrying a label and a real eigenvalue. Labels — not eigenvalues — identify
//! branches, so degenerate observables (rank > 1 branch projectors, or several
//! branches sharing an eigenvalue) are first-class.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{apply, lift_to_subsystem, projector_onto, Ket, Operator, SubsystemLayout};

/// One outcome of a projective measurement.
#[derive(Debug, Clone)]
pub struct Branch {
    pub label: String,
    pub eigenvalue: f64,
    pub projector: Operator,
}

impl Branch {
    pub fn new(label: impl Into<String>, eigenvalue: f64, projector: Operator) -> Self {
        Self {
            label: label.into(),
            eigenvalue,
            projector,
        }
    }
}

/// Result of checking a prospective observable against its invariants.
/// Empty `issues` means the decomposition is valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn push(&mut self, issue: impl Into<String>) {
        self.issues.push(issue.into());
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "ok");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {issue}")?;
        }
        Ok(())
    }
}

/// Check a prospective projector decomposition without constructing it:
/// unique labels, Hermitian idempotent projectors on the right space, pairwise
/// orthogonality, and completeness. Every violation is reported with the norm
/// that witnesses it.
pub fn validate_observable(
    layout: &SubsystemLayout,
    branches: &[Branch],
    eps: f64,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    if branches.is_empty() {
        report.push("observable has no branches");
        return report;
    }
    for (i, b) in branches.iter().enumerate() {
        for later in &branches[i + 1..] {
            if later.label == b.label {
                report.push(format!("duplicate outcome label '{}'", b.label));
            }
        }
        if !b.eigenvalue.is_finite() {
            report.push(format!("branch '{}': eigenvalue is not finite", b.label));
        }
        if b.projector.layout() != layout {
            report.push(format!(
                "branch '{}': projector is on {} but the observable lives on {}",
                b.label,
                b.projector.layout(),
                layout
            ));
            continue;
        }
        let herm_dev = b
            .projector
            .sub(&b.projector.adjoint())
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY);
        if herm_dev > eps {
            report.push(format!(
                "branch '{}': projector is not Hermitian (max deviation {herm_dev:.3e})",
                b.label
            ));
        }
        let idem_dev = b
            .projector
            .matmul(&b.projector)
            .and_then(|sq| sq.sub(&b.projector))
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY);
        if idem_dev > eps {
            report.push(format!(
                "branch '{}': projector is not idempotent (max |P^2 - P| = {idem_dev:.3e})",
                b.label
            ));
        }
    }
    if !report.passed() {
        // Orthogonality/completeness norms are meaningless on mismatched layouts.
        if branches
            .iter()
            .any(|b| b.projector.layout() != layout)
        {
            return report;
        }
    }
    for (i, a) in branches.iter().enumerate() {
        for b in &branches[i + 1..] {
            let cross = a
                .projector
                .matmul(&b.projector)
                .map(|p| p.max_abs())
                .unwrap_or(f64::INFINITY);
            if cross > eps {
                report.push(format!(
                    "branches '{}' and '{}' are not orthogonal (max |P_a P_b| = {cross:.3e})",
                    a.label, b.label
                ));
            }
        }
    }
    let mut sum = Operator::zeros(layout.clone());
    for b in branches {
        sum = sum.add(&b.projector).expect("layouts checked above");
    }
    let complete_dev = sum
        .sub(&Operator::identity(layout.clone()))
        .map(|d| d.max_abs())
        .unwrap_or(f64::INFINITY);
    if complete_dev > eps {
        report.push(format!(
            "branches are not complete (max |sum P_a - I| = {complete_dev:.3e})"
        ));
    }
    report
}

/// A complete labeled projector decomposition of the identity.
#[derive(Debug, Clone)]
pub struct Observable {
    layout: SubsystemLayout,
    branches: Vec<Branch>,
}

impl Observable {
    /// Validate and construct with the given tolerance.
    pub fn new(layout: SubsystemLayout, branches: Vec<Branch>, eps: f64) -> Result<Self> {
        let report = validate_observable(&layout, &branches, eps);
        if !report.passed() {
            return Err(Error::InvalidObservable {
                report: report.to_string(),
            });
        }
        Ok(Self { layout, branches })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, label: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.branches.iter().map(|b| b.label.as_str())
    }

    /// The Hermitian operator `sum_a a P_a` this observable decomposes.
    pub fn to_operator(&self) -> Operator {
        let mut op = Operator::zeros(self.layout.clone());
        for b in &self.branches {
            op = op
                .add(&b.projector.scaled(Complex64::new(b.eigenvalue, 0.0)))
                .expect("branch layouts validated at construction");
        }
        op
    }

    /// Two-branch observable `{p, 1 - p}` — the yes/no question "is the
    /// system in the range of `p`?" with eigenvalues 1 and 0.
    pub fn from_projector(
        layout: SubsystemLayout,
        p: Operator,
        yes_label: impl Into<String>,
        no_label: impl Into<String>,
        eps: f64,
    ) -> Result<Self> {
        let complement = Operator::identity(layout.clone()).sub(&p)?;
        Self::new(
            layout,
            vec![
                Branch::new(yes_label, 1.0, p),
                Branch::new(no_label, 0.0, complement),
            ],
            eps,
        )
    }

    /// A Pauli spin component on qubit `target` of `layout`, lifted to the
    /// full space. Branch labels are `"+1"` and `"-1"`.
    pub fn pauli(axis: PauliAxis, target: usize, layout: &SubsystemLayout) -> Result<Self> {
        let count = layout.subsystem_count();
        if target >= count {
            return Err(Error::SubsystemIndex {
                index: target,
                count,
            });
        }
        if layout.dims()[target] != 2 {
            return Err(Error::BadSubsystemDim {
                dim: layout.dims()[target],
            });
        }
        let qubit = SubsystemLayout::single(2)?;
        let r = 0.5f64.sqrt();
        let (plus, minus) = match axis {
            PauliAxis::X => (
                Ket::from_real(qubit.clone(), &[r, r])?,
                Ket::from_real(qubit.clone(), &[r, -r])?,
            ),
            PauliAxis::Y => (
                Ket::new(
                    qubit.clone(),
                    vec![Complex64::new(r, 0.0), Complex64::new(0.0, r)],
                )?,
                Ket::new(
                    qubit.clone(),
                    vec![Complex64::new(r, 0.0), Complex64::new(0.0, -r)],
                )?,
            ),
            PauliAxis::Z => (
                Ket::basis_state(qubit.clone(), 0)?,
                Ket::basis_state(qubit.clone(), 1)?,
            ),
        };
        let p_plus = lift_to_subsystem(&projector_onto(&plus)?, target, layout)?;
        let p_minus = lift_to_subsystem(&projector_onto(&minus)?, target, layout)?;
        Self::new(
            layout.clone(),
            vec![
                Branch::new("+1", 1.0, p_plus),
                Branch::new("-1", -1.0, p_minus),
            ],
            crate::hilbert::DEFAULT_EPS,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for PauliAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" | "sigma_x" => Ok(Self::X),
            "y" | "Y" | "sigma_y" => Ok(Self::Y),
            "z" | "Z" | "sigma_z" => Ok(Self::Z),
            other => Err(Error::BadOperatorSpec {
                spec: other.to_string(),
                reason: "expected one of sigma_x, sigma_y, sigma_z".to_string(),
            }),
        }
    }
}

/// Outcome probabilities of one projective measurement, in branch order.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    entries: Vec<(String, f64)>,
}

impl OutcomeDistribution {
    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn probability(&self, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, p)| p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, p)| p).sum()
    }
}

/// Born rule: `P(a) = || P_a |psi> ||^2` for a normalized state.
pub fn born_distribution(state: &Ket, obs: &Observable) -> Result<OutcomeDistribution> {
    if state.layout() != obs.layout() {
        return Err(Error::LayoutMismatch {
            left: state.layout().to_string(),
            right: obs.layout().to_string(),
        });
    }
    if !state.is_normalized(crate::hilbert::DEFAULT_EPS) {
        return Err(Error::NotNormalized {
            norm_sqr: state.norm_sqr(),
        });
    }
    let entries = obs
        .branches()
        .iter()
        .map(|b| Ok((b.label.clone(), apply(&b.projector, state)?.norm_sqr())))
        .collect::<Result<Vec<_>>>()?;
    Ok(OutcomeDistribution { entries })
}

/// Project onto the chosen branch and renormalize: `P_a |psi> / ||...||`.
///
/// A forced outcome whose probability is at or below `eps` is an error — a
/// post-selected story that walks through a zero-probability branch is
/// inconsistent, not merely unlikely.
pub fn collapse(state: &Ket, obs: &Observable, outcome: &str, eps: f64) -> Result<Ket> {
    if state.layout() != obs.layout() {
        return Err(Error::LayoutMismatch {
            left: state.layout().to_string(),
            right: obs.layout().to_string(),
        });
    }
    if !state.is_normalized(crate::hilbert::DEFAULT_EPS) {
        return Err(Error::NotNormalized {
            norm_sqr: state.norm_sqr(),
        });
    }
    let branch = obs.branch(outcome).ok_or_else(|| Error::UnknownOutcome {
        label: outcome.to_string(),
    })?;
    let projected = apply(&branch.projector, state)?;
    let p = projected.norm_sqr();
    if p <= eps {
        return Err(Error::ImpossibleOutcome {
            label: outcome.to_string(),
            probability: p,
        });
    }
    projected.normalize()
}

/// The full record of a forced measurement chain.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    /// Initial state, then the state after each step (length `steps + 1`).
    pub trajectory: Vec<Ket>,
    /// Born probability of each forced outcome given the state before it.
    pub step_probabilities: Vec<f64>,
    /// Product of the step probabilities.
    pub joint_probability: f64,
}

/// Collapse through a sequence of forced outcomes, recording every
/// intermediate state and the joint probability of the whole chain.
pub fn measure_sequence(
    state: &Ket,
    steps: &[(&Observable, &str)],
    eps: f64,
) -> Result<MeasurementRecord> {
    let mut trajectory = vec![state.clone()];
    let mut step_probabilities = Vec::with_capacity(steps.len());
    let mut joint = 1.0;
    for (i, (obs, outcome)) in steps.iter().enumerate() {
        let current = trajectory.last().expect("trajectory starts non-empty");
        let branch = obs.branch(outcome).ok_or_else(|| Error::StepFailed {
            step: i,
            source: Box::new(Error::UnknownOutcome {
                label: outcome.to_string(),
            }),
        })?;
        let projected = apply(&branch.projector, current).map_err(|e| Error::StepFailed {
            step: i,
            source: Box::new(e),
        })?;
        let p = projected.norm_sqr();
        if p <= eps {
            return Err(Error::StepFailed {
                step: i,
                source: Box::new(Error::ImpossibleOutcome {
                    label: outcome.to_string(),
                    probability: p,
                }),
            });
        }
        joint *= p;
        trajectory.push(projected.normalize().map_err(|e| Error::StepFailed {
            step: i,
            source: Box::new(e),
        })?);
        step_probabilities.push(p);
    }
    Ok(MeasurementRecord {
        trajectory,
        step_probabilities,
        joint_probability: joint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::DEFAULT_EPS;
    use approx::assert_abs_diff_eq;

    fn three_level() -> SubsystemLayout {
        SubsystemLayout::single(3).unwrap()
    }

    fn eq1_state() -> Ket {
        let s = 3f64.sqrt().recip();
        Ket::from_real(three_level(), &[s, s, s]).unwrap()
    }

    /// "Open box A": {found = |A><A|, not-found = 1 - |A><A|}.
    fn open_box(index: usize) -> Observable {
        let basis = Ket::basis_state(three_level(), index).unwrap();
        Observable::from_projector(
            three_level(),
            projector_onto(&basis).unwrap(),
            "found",
            "not-found",
            DEFAULT_EPS,
        )
        .unwrap()
    }

    fn hardy_layout() -> SubsystemLayout {
        SubsystemLayout::qubits(2).unwrap()
    }

    fn hardy_pre() -> Ket {
        let s = 3f64.sqrt().recip();
        Ket::from_real(hardy_layout(), &[s, s, s, 0.0]).unwrap()
    }

    #[test]
    fn pauli_observables_validate_and_decompose() {
        let layout = hardy_layout();
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            for target in 0..2 {
                let obs = Observable::pauli(axis, target, &layout).unwrap();
                assert_eq!(obs.branches().len(), 2);
                // sum a P_a reproduces the lifted Pauli matrix.
                let pauli = match axis {
                    PauliAxis::X => Operator::pauli_x(),
                    PauliAxis::Y => Operator::pauli_y(),
                    PauliAxis::Z => Operator::pauli_z(),
                };
                let lifted = lift_to_subsystem(&pauli, target, &layout).unwrap();
                let dev = obs.to_operator().sub(&lifted).unwrap().max_abs();
                assert!(dev < 1e-14, "axis {axis:?} target {target}: dev {dev}");
            }
        }
    }

    #[test]
    fn duplicate_projector_fails_completeness_and_orthogonality() {
        let layout = SubsystemLayout::single(2).unwrap();
        let up = Ket::basis_state(layout.clone(), 0).unwrap();
        let p_up = projector_onto(&up).unwrap();
        let report = validate_observable(
            &layout,
            &[
                Branch::new("a", 1.0, p_up.clone()),
                Branch::new("b", -1.0, p_up),
            ],
            DEFAULT_EPS,
        );
        assert!(!report.passed());
        let text = report.to_string();
        assert!(text.contains("not orthogonal"), "got: {text}");
        assert!(text.contains("not complete"), "got: {text}");
    }

    #[test]
    fn non_projector_branch_is_reported_with_norm() {
        let layout = SubsystemLayout::single(2).unwrap();
        let half = Operator::identity(layout.clone()).scaled(Complex64::new(0.5, 0.0));
        let report = validate_observable(
            &layout,
            &[
                Branch::new("a", 1.0, half.clone()),
                Branch::new("b", 0.0, half),
            ],
            DEFAULT_EPS,
        );
        assert!(!report.passed());
        assert!(report.to_string().contains("not idempotent"));
    }

    #[test]
    fn degenerate_rank_two_branches_are_valid() {
        // The parity observable on two qubits: eigenvalue +1 on {uu, dd},
        // -1 on {ud, du}; both projectors have rank 2.
        let layout = hardy_layout();
        let mut even = Operator::zeros(layout.clone());
        let mut odd = Operator::zeros(layout.clone());
        for flat in 0..4 {
            let basis = Ket::basis_state(layout.clone(), flat).unwrap();
            let p = projector_onto(&basis).unwrap();
            if flat == 0 || flat == 3 {
                even = even.add(&p).unwrap();
            } else {
                odd = odd.add(&p).unwrap();
            }
        }
        let obs = Observable::new(
            layout,
            vec![Branch::new("+1", 1.0, even), Branch::new("-1", -1.0, odd)],
            DEFAULT_EPS,
        )
        .unwrap();
        assert_eq!(obs.branches().len(), 2);
        assert_abs_diff_eq!(
            obs.branch("+1").unwrap().projector.trace().re,
            2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn born_rule_for_opening_box_a() {
        let dist = born_distribution(&eq1_state(), &open_box(0)).unwrap();
        assert_abs_diff_eq!(dist.probability("found").unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            dist.probability("not-found").unwrap(),
            2.0 / 3.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(dist.total(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn born_rule_for_joint_x_measurement() {
        // Probability of (-1, -1) under sigma_x (x) sigma_x on the Hardy
        // pre-selected state is |<post|pre>|^2 = 1/12.
        let layout = hardy_layout();
        let x1 = Observable::pauli(PauliAxis::X, 0, &layout).unwrap();
        let x2 = Observable::pauli(PauliAxis::X, 1, &layout).unwrap();
        let mut branches = Vec::new();
        for a in x1.branches() {
            for b in x2.branches() {
                branches.push(Branch::new(
                    format!("{},{}", a.label, b.label),
                    a.eigenvalue * b.eigenvalue,
                    a.projector.matmul(&b.projector).unwrap(),
                ));
            }
        }
        let joint = Observable::new(layout, branches, DEFAULT_EPS).unwrap();
        let dist = born_distribution(&hardy_pre(), &joint).unwrap();
        assert_abs_diff_eq!(
            dist.probability("-1,-1").unwrap(),
            1.0 / 12.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(dist.total(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn collapse_reproduces_the_opened_box_states() {
        // Not finding the particle in A leaves (|B> + |C>)/sqrt(2).
        let after_a = collapse(&eq1_state(), &open_box(0), "not-found", DEFAULT_EPS).unwrap();
        let r = 0.5f64.sqrt();
        for (got, want) in after_a.amplitudes().iter().zip([0.0, r, r]) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-14);
        }
        // Then finding it in C leaves |C>.
        let after_c = collapse(&after_a, &open_box(2), "found", DEFAULT_EPS).unwrap();
        for (got, want) in after_c.amplitudes().iter().zip([0.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn collapse_on_hardy_state_gives_the_x_minus_branch() {
        // sigma_1x = -1 on the pre-selected state leaves
        // (|u> - |d>)_1 |d>_2 / sqrt(2), reached with probability 1/6.
        let layout = hardy_layout();
        let x1 = Observable::pauli(PauliAxis::X, 0, &layout).unwrap();
        let pre = hardy_pre();
        let dist = born_distribution(&pre, &x1).unwrap();
        assert_abs_diff_eq!(dist.probability("-1").unwrap(), 1.0 / 6.0, epsilon = 1e-14);
        let collapsed = collapse(&pre, &x1, "-1", DEFAULT_EPS).unwrap();
        let r = 0.5f64.sqrt();
        for (got, want) in collapsed.amplitudes().iter().zip([0.0, r, 0.0, -r]) {
            assert_abs_diff_eq!(got.re, want, epsilon = 1e-14);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn impossible_forced_outcome_is_an_error() {
        // After finding the particle in C, opening A cannot find it.
        let c_state = Ket::basis_state(three_level(), 2).unwrap();
        let err = collapse(&c_state, &open_box(0), "found", DEFAULT_EPS).unwrap_err();
        assert!(matches!(err, Error::ImpossibleOutcome { .. }), "got {err}");
    }

    #[test]
    fn unknown_label_is_an_error() {
        let err = collapse(&eq1_state(), &open_box(0), "maybe", DEFAULT_EPS).unwrap_err();
        assert!(matches!(err, Error::UnknownOutcome { .. }));
    }

    #[test]
    fn sequence_through_boxes_a_then_c() {
        let a = open_box(0);
        let c = open_box(2);
        let record = measure_sequence(
            &eq1_state(),
            &[(&a, "not-found"), (&c, "found")],
            DEFAULT_EPS,
        )
        .unwrap();
        assert_eq!(record.trajectory.len(), 3);
        assert_abs_diff_eq!(record.step_probabilities[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(record.step_probabilities[1], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(record.joint_probability, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn sequence_through_boxes_c_then_a() {
        let a = open_box(0);
        let c = open_box(2);
        let record = measure_sequence(
            &eq1_state(),
            &[(&c, "found"), (&a, "not-found")],
            DEFAULT_EPS,
        )
        .unwrap();
        assert_abs_diff_eq!(record.step_probabilities[0], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(record.step_probabilities[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(record.joint_probability, 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn sequence_error_names_the_failing_step() {
        let a = open_box(0);
        let c = open_box(2);
        let err = measure_sequence(
            &eq1_state(),
            &[(&c, "found"), (&a, "found")],
            DEFAULT_EPS,
        )
        .unwrap_err();
        match err {
            Error::StepFailed { step, source } => {
                assert_eq!(step, 1);
                assert!(matches!(*source, Error::ImpossibleOutcome { .. }));
            }
            other => panic!("expected StepFailed, got {other}"),
        }
    }

    #[test]
    fn collapse_is_repeatable() {
        // Measuring the same observable twice gives the same branch with
        // probability 1 and leaves the state fixed.
        let layout = hardy_layout();
        let x1 = Observable::pauli(PauliAxis::X, 0, &layout).unwrap();
        let once = collapse(&hardy_pre(), &x1, "-1", DEFAULT_EPS).unwrap();
        let again = born_distribution(&once, &x1).unwrap();
        assert_abs_diff_eq!(again.probability("-1").unwrap(), 1.0, epsilon = 1e-14);
        let twice = collapse(&once, &x1, "-1", DEFAULT_EPS).unwrap();
        assert!(once.componentwise_distance_up_to_phase(&twice).unwrap() < 1e-14);
    }
}
