//! Reference frames as measurement orderings.
//!
//! For spacelike-separated measurement events, different observers disagree
//! about which happened first. This module models a frame as nothing but an
//! ordering (a permutation of event ids), replays the collapse trajectory each
//! ordering implies, and compares the results: joint probabilities, final
//! states, and the intermediate states at every cut point. The punchline the
//! comparison is built to exhibit: outcome statistics are ordering-invariant
//! when the events commute, while the collapse *trajectories* between
//! measurements can still differ radically.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::hilbert::{apply, Ket, Operator};
use crate::measurement::{measure_sequence, Observable};

/// One measurement occurrence: what is measured, and (optionally) the outcome
/// the story under analysis forces it to have.
#[derive(Debug, Clone)]
pub struct MeasurementEvent {
    pub id: String,
    pub observable: Observable,
    pub forced_outcome: Option<String>,
}

impl MeasurementEvent {
    pub fn forced(
        id: impl Into<String>,
        observable: Observable,
        outcome: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            observable,
            forced_outcome: Some(outcome.into()),
        }
    }

    pub fn unforced(id: impl Into<String>, observable: Observable) -> Self {
        Self {
            id: id.into(),
            observable,
            forced_outcome: None,
        }
    }
}

/// A temporal ordering of the event set — the entire content of a "frame"
/// here. Two observers are two permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    sequence: Vec<String>,
}

impl Ordering {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            sequence: ids.into_iter().map(Into::into).collect(),
        }
    }

    pub fn sequence(&self) -> &[String] {
        &self.sequence
    }
}

impl std::fmt::Display for Ordering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.sequence.join(", "))
    }
}

/// A state in a trajectory, tagged with the event that produced it
/// (`None` for the initial state).
#[derive(Debug, Clone)]
pub struct TaggedState {
    pub event_id: Option<String>,
    pub state: Ket,
}

/// The collapse story one ordering tells.
#[derive(Debug, Clone)]
pub struct OrderingRun {
    pub ordering: Ordering,
    /// Initial state first, then the post-collapse state of each event,
    /// in the order this frame says they happened.
    pub trajectory: Vec<TaggedState>,
    pub step_probabilities: Vec<f64>,
    pub joint_probability: f64,
}

impl OrderingRun {
    pub fn final_state(&self) -> &Ket {
        &self.trajectory.last().expect("trajectory is never empty").state
    }
}

/// Overlap between two frames' states after `depth` completed events.
#[derive(Debug, Clone)]
pub struct PrefixOverlap {
    pub depth: usize,
    /// Indices into the compared ordering list.
    pub first: usize,
    pub second: usize,
    /// |<state_first | state_second>|^2 at this depth.
    pub overlap: f64,
    /// Whether the two frames have completed the same multiset of events at
    /// this depth. When false the two states answer different questions —
    /// that is exactly where frame-dependent descriptions diverge.
    pub same_multiset: bool,
}

/// Joint distribution over complete outcome assignments, for one ordering.
/// Keys are canonical (`"A=found, C=not-found"`, sorted by event id) so that
/// distributions from different orderings can be compared entry by entry.
#[derive(Debug, Clone)]
pub struct AssignmentDistribution {
    pub ordering: Ordering,
    pub entries: Vec<(String, f64)>,
}

impl AssignmentDistribution {
    pub fn probability(&self, key: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|&(_, p)| p)
    }
}

/// What a set of frames agree and disagree about.
#[derive(Debug, Clone)]
pub struct OrderingComparison {
    /// Full trajectories, present when every event has a forced outcome.
    pub runs: Option<Vec<OrderingRun>>,
    /// Joint probability of the forced story, per ordering.
    pub joint_probabilities: Option<Vec<f64>>,
    /// Minimum pairwise |<final_i|final_j>|^2 across the orderings.
    pub final_overlap: Option<f64>,
    /// Pairwise overlaps at every interior depth, with a flag marking whether
    /// the cut points are matched (equal completed-event multisets).
    pub intermediate_overlaps: Vec<PrefixOverlap>,
    /// Joint outcome statistics per ordering, enumerated over every branch
    /// chain. Empty only when enumeration was skipped (see `warnings`).
    pub outcome_distributions: Vec<AssignmentDistribution>,
    /// Whether the enumerated outcome distributions agree across orderings.
    pub distributions_match: bool,
    /// Whether every pair of projectors from distinct events commutes.
    pub all_commute: bool,
    pub warnings: Vec<String>,
    /// Forced events: joint probabilities agree and the final states coincide.
    /// Unforced events: the joint outcome distributions agree.
    pub ordering_invariant: bool,
}

/// Chain enumeration is exponential in the event count; beyond this many
/// outcome assignments it is skipped (an error if the comparison has nothing
/// else to compare).
const CHAIN_CAP: u128 = 1 << 16;

fn resolve<'a>(
    events: &'a [MeasurementEvent],
    ordering: &Ordering,
) -> Result<Vec<&'a MeasurementEvent>> {
    for (i, e) in events.iter().enumerate() {
        if events[i + 1..].iter().any(|other| other.id == e.id) {
            return Err(Error::BadConfig(format!("duplicate event id '{}'", e.id)));
        }
    }
    let seq = ordering
        .sequence()
        .iter()
        .map(|id| {
            events
                .iter()
                .find(|e| &e.id == id)
                .ok_or_else(|| Error::UnknownEvent { id: id.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    let distinct: BTreeSet<&str> = ordering.sequence().iter().map(String::as_str).collect();
    if distinct.len() != ordering.sequence().len() || seq.len() != events.len() {
        return Err(Error::NotAPermutation {
            ordering: ordering.to_string(),
        });
    }
    Ok(seq)
}

/// Replay the collapse trajectory one frame sees. Every event must carry a
/// forced outcome; the trajectory is tagged with event ids in frame order.
pub fn run_ordering(
    initial: &Ket,
    events: &[MeasurementEvent],
    ordering: &Ordering,
    eps: f64,
) -> Result<OrderingRun> {
    let seq = resolve(events, ordering)?;
    let steps = seq
        .iter()
        .map(|e| {
            let outcome = e
                .forced_outcome
                .as_deref()
                .ok_or_else(|| Error::UnforcedEvent { id: e.id.clone() })?;
            Ok((&e.observable, outcome))
        })
        .collect::<Result<Vec<_>>>()?;
    let record = measure_sequence(initial, &steps, eps).map_err(|e| match e {
        Error::StepFailed { step, source } => Error::OrderingFailed {
            event: seq[step].id.clone(),
            ordering: ordering.to_string(),
            source,
        },
        other => other,
    })?;
    let trajectory = record
        .trajectory
        .into_iter()
        .enumerate()
        .map(|(i, state)| TaggedState {
            event_id: i.checked_sub(1).map(|k| seq[k].id.clone()),
            state,
        })
        .collect();
    Ok(OrderingRun {
        ordering: ordering.clone(),
        trajectory,
        step_probabilities: record.step_probabilities,
        joint_probability: record.joint_probability,
    })
}

/// Subsystems on which `op` acts nontrivially, i.e. those that cannot be
/// factored out of it as an identity.
pub fn nontrivial_support(op: &Operator) -> Vec<usize> {
    let layout = op.layout();
    let dim = layout.total_dim();
    let mut support = Vec::new();
    for k in 0..layout.subsystem_count() {
        let d_k = layout.dims()[k];
        let stride = layout.stride(k);
        let mut trivial = true;
        'scan: for i in 0..dim {
            let i_k = (i / stride) % d_k;
            for j in 0..dim {
                let j_k = (j / stride) % d_k;
                let entry = op.entry(i, j);
                if i_k != j_k {
                    if entry.norm() > 1e-12 {
                        trivial = false;
                        break 'scan;
                    }
                } else if i_k > 0 {
                    let base = op.entry(i - i_k * stride, j - j_k * stride);
                    if (entry - base).norm() > 1e-12 {
                        trivial = false;
                        break 'scan;
                    }
                }
            }
        }
        if !trivial {
            support.push(k);
        }
    }
    support
}

fn event_support(event: &MeasurementEvent) -> BTreeSet<usize> {
    event
        .observable
        .branches()
        .iter()
        .flat_map(|b| nontrivial_support(&b.projector))
        .collect()
}

fn max_cross_commutator(a: &MeasurementEvent, b: &MeasurementEvent) -> f64 {
    let mut worst = 0.0f64;
    for pa in a.observable.branches() {
        for pb in b.observable.branches() {
            let c = pa
                .projector
                .commutator_max_abs(&pb.projector)
                .unwrap_or(f64::INFINITY);
            worst = worst.max(c);
        }
    }
    worst
}

fn enumerate_assignments(
    initial: &Ket,
    seq: &[&MeasurementEvent],
) -> Result<Vec<(String, f64)>> {
    fn recurse(
        state: &Ket,
        seq: &[&MeasurementEvent],
        depth: usize,
        choices: &mut Vec<(String, String)>,
        out: &mut Vec<(String, f64)>,
    ) -> Result<()> {
        if depth == seq.len() {
            let mut sorted = choices.clone();
            sorted.sort();
            let key = sorted
                .iter()
                .map(|(id, label)| format!("{id}={label}"))
                .collect::<Vec<_>>()
                .join(", ");
            out.push((key, state.norm_sqr()));
            return Ok(());
        }
        for branch in seq[depth].observable.branches() {
            let projected = apply(&branch.projector, state)?;
            choices.push((seq[depth].id.clone(), branch.label.clone()));
            recurse(&projected, seq, depth + 1, choices, out)?;
            choices.pop();
        }
        Ok(())
    }

    let mut out = Vec::new();
    recurse(initial, seq, 0, &mut Vec::new(), &mut out)?;
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Run every ordering and report what depends on the frame and what does not.
pub fn compare_orderings(
    initial: &Ket,
    events: &[MeasurementEvent],
    orderings: &[Ordering],
    eps: f64,
) -> Result<OrderingComparison> {
    if orderings.len() < 2 {
        return Err(Error::TooFewOrderings);
    }
    let sequences = orderings
        .iter()
        .map(|o| resolve(events, o))
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let mut all_commute = true;
    for (i, a) in events.iter().enumerate() {
        for b in &events[i + 1..] {
            let shared: Vec<usize> = event_support(a)
                .intersection(&event_support(b))
                .copied()
                .collect();
            if !shared.is_empty() {
                warnings.push(format!(
                    "events '{}' and '{}' act on shared subsystem(s) {shared:?}; \
                     their order could matter, so commutation was checked explicitly",
                    a.id, b.id
                ));
            }
            let cross = max_cross_commutator(a, b);
            if cross > eps {
                all_commute = false;
                warnings.push(format!(
                    "events '{}' and '{}' do not commute (max commutator entry {cross:.3e}); \
                     outcome statistics may depend on the ordering",
                    a.id, b.id
                ));
            }
        }
    }

    let all_forced = events.iter().all(|e| e.forced_outcome.is_some());

    let chain_count: u128 = events
        .iter()
        .map(|e| e.observable.branches().len() as u128)
        .product();
    let enumerate = chain_count <= CHAIN_CAP;
    if !enumerate {
        if !all_forced {
            return Err(Error::BadConfig(format!(
                "comparing unforced events requires enumerating {chain_count} outcome chains, \
                 above the supported cap of {CHAIN_CAP}"
            )));
        }
        warnings.push(format!(
            "outcome-chain enumeration skipped ({chain_count} chains exceed the cap of {CHAIN_CAP})"
        ));
    }

    let outcome_distributions = if enumerate {
        let per_ordering = map_indexed(sequences.len(), |i| {
            enumerate_assignments(initial, &sequences[i])
        });
        per_ordering
            .into_iter()
            .zip(orderings)
            .map(|(entries, ordering)| {
                Ok(AssignmentDistribution {
                    ordering: ordering.clone(),
                    entries: entries?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let mut distributions_match = true;
    if let Some((first, rest)) = outcome_distributions.split_first() {
        for dist in rest {
            let agree = dist.entries.len() == first.entries.len()
                && dist
                    .entries
                    .iter()
                    .zip(&first.entries)
                    .all(|((ka, pa), (kb, pb))| ka == kb && (pa - pb).abs() <= eps);
            if !agree {
                distributions_match = false;
            }
        }
    }

    let (runs, joint_probabilities, final_overlap, intermediate_overlaps, ordering_invariant);
    if all_forced {
        let results = map_indexed(orderings.len(), |i| {
            run_ordering(initial, events, &orderings[i], eps)
        });
        let completed: Vec<OrderingRun> = results.into_iter().collect::<Result<_>>()?;
        let joints: Vec<f64> = completed.iter().map(|r| r.joint_probability).collect();

        let mut min_final = 1.0f64;
        let mut overlaps = Vec::new();
        for i in 0..completed.len() {
            for j in i + 1..completed.len() {
                min_final = min_final.min(
                    completed[i]
                        .final_state()
                        .overlap_sqr(completed[j].final_state())?,
                );
                for depth in 1..events.len() {
                    let mut prefix_i: Vec<&str> = orderings[i].sequence()[..depth]
                        .iter()
                        .map(String::as_str)
                        .collect();
                    let mut prefix_j: Vec<&str> = orderings[j].sequence()[..depth]
                        .iter()
                        .map(String::as_str)
                        .collect();
                    prefix_i.sort_unstable();
                    prefix_j.sort_unstable();
                    overlaps.push(PrefixOverlap {
                        depth,
                        first: i,
                        second: j,
                        overlap: completed[i].trajectory[depth]
                            .state
                            .overlap_sqr(&completed[j].trajectory[depth].state)?,
                        same_multiset: prefix_i == prefix_j,
                    });
                }
            }
        }

        let joints_agree = joints
            .iter()
            .all(|&p| (p - joints[0]).abs() <= eps);
        ordering_invariant = joints_agree && min_final >= 1.0 - eps;
        runs = Some(completed);
        joint_probabilities = Some(joints);
        final_overlap = Some(min_final);
        intermediate_overlaps = overlaps;
    } else {
        runs = None;
        joint_probabilities = None;
        final_overlap = None;
        intermediate_overlaps = Vec::new();
        ordering_invariant = distributions_match;
    }

    Ok(OrderingComparison {
        runs,
        joint_probabilities,
        final_overlap,
        intermediate_overlaps,
        outcome_distributions,
        distributions_match,
        all_commute,
        warnings,
        ordering_invariant,
    })
}
