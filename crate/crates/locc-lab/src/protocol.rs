//! Round-by-round local elimination protocol for orthogonal pure states.
//!
//! Each round consumes one fresh copy of the unknown state. The first
//! two surviving candidates are brought into canonical form; Alice
//! measures in the rotated basis, Bob measures in the basis attached to
//! Alice's outcome, and every candidate assigning zero probability to
//! the observed joint outcome is eliminated. The canonical structure
//! guarantees at least one of the chosen pair goes each round, so `N`
//! orthogonal states are identified with at most `N - 1` copies.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::{expand_residuals, walgate_decompose};
use crate::hilbert::{PureState, SpaceShape};
use crate::{derive_seed, Error, Result, DEFAULT_TOL};

/// Joint-outcome probability below which a candidate is eliminated.
/// Exact zeros here are structural (orthogonality), not noise.
pub const ELIMINATION_TOL: f64 = 1e-9;

/// An ordered set of pairwise orthogonal pure states with labels.
#[derive(Debug, Clone)]
pub struct EnsemblePure {
    states: Vec<PureState>,
    labels: Vec<String>,
}

impl EnsemblePure {
    /// Validates: non-empty, common shape, pairwise orthogonal.
    pub fn new(states: Vec<PureState>, labels: Vec<String>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("ensemble needs at least one state".into()));
        }
        if labels.len() != states.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} states",
                labels.len(),
                states.len()
            )));
        }
        let shape = states[0].shape();
        for s in &states[1..] {
            if s.shape() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "ensemble mixes shapes {} and {}",
                    shape,
                    s.shape()
                )));
            }
        }
        for i in 0..states.len() {
            for j in (i + 1)..states.len() {
                let overlap = states[i].inner(&states[j])?.norm();
                if overlap > DEFAULT_TOL.orth {
                    return Err(Error::NotOrthogonal(overlap));
                }
            }
        }
        Ok(EnsemblePure { states, labels })
    }

    /// Convenience constructor labeling states by their index.
    pub fn with_index_labels(states: Vec<PureState>) -> Result<Self> {
        let labels = (0..states.len()).map(|i| i.to_string()).collect();
        Self::new(states, labels)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn shape(&self) -> SpaceShape {
        self.states[0].shape()
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// What happened in one measurement round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTranscript {
    pub copy_index: usize,
    /// Index of the two candidates brought into canonical form.
    pub pair: (usize, usize),
    pub alice_outcome: usize,
    pub bob_outcome: usize,
    /// Indices eliminated this round (at least one).
    pub eliminated: Vec<usize>,
    /// Indices still alive after the round.
    pub survivors: Vec<usize>,
}

/// Result of a full identification run.
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub identified_index: usize,
    pub identified_label: String,
    pub copies_used: usize,
    pub transcripts: Vec<RoundTranscript>,
}

/// Play one round on the current survivors.
///
/// `survivors` are indices into the ensemble, the true state must be
/// among them, and at least two candidates must remain. Outcomes are
/// sampled by the Born rule from the true state.
pub fn run_round<R: Rng>(
    ensemble: &EnsemblePure,
    survivors: &[usize],
    true_index: usize,
    copy_index: usize,
    rng: &mut R,
) -> Result<RoundTranscript> {
    if survivors.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "round needs at least 2 survivors, got {}",
            survivors.len()
        )));
    }
    if !survivors.contains(&true_index) {
        return Err(Error::InvalidInput(format!(
            "true state {true_index} is not among the survivors"
        )));
    }
    let (s1, s2) = (survivors[0], survivors[1]);
    let pair = walgate_decompose(&ensemble.states[s1], &ensemble.states[s2])?;
    let survivor_states: Vec<PureState> =
        survivors.iter().map(|&i| ensemble.states[i].clone()).collect();
    let expansions = expand_residuals(&pair, &survivor_states)?;

    let true_pos = survivors.iter().position(|&i| i == true_index).unwrap();
    let shape = ensemble.shape();

    // Alice outcome: p(k) = ‖χ_k‖² for the true state
    let alice_probs: Vec<f64> = (0..shape.dim_a)
        .map(|k| {
            expansions[true_pos].coeffs[k]
                .iter()
                .map(|c| c.norm_sqr())
                .sum()
        })
        .collect();
    let alice_outcome = sample_index(&alice_probs, rng);

    // Bob outcome within basis B_k, renormalized to the Alice branch
    let bob_probs: Vec<f64> = expansions[true_pos].coeffs[alice_outcome]
        .iter()
        .map(|c| c.norm_sqr())
        .collect();
    let bob_outcome = sample_index(&bob_probs, rng);

    let mut eliminated = Vec::new();
    let mut remaining = Vec::new();
    for (pos, &idx) in survivors.iter().enumerate() {
        let joint_prob = expansions[pos].coeffs[alice_outcome][bob_outcome].norm_sqr();
        if joint_prob < ELIMINATION_TOL {
            eliminated.push(idx);
        } else {
            remaining.push(idx);
        }
    }

    // soundness: the sampled outcome has positive probability under the
    // true state, so it can never be eliminated
    assert!(
        remaining.contains(&true_index),
        "true state was eliminated (joint probability {:.3e})",
        expansions[true_pos].coeffs[alice_outcome][bob_outcome].norm_sqr()
    );
    // progress: the canonical pair guarantees at least one elimination
    assert!(
        !eliminated.is_empty(),
        "round eliminated nothing (alice={alice_outcome}, bob={bob_outcome})"
    );

    Ok(RoundTranscript {
        copy_index,
        pair: (s1, s2),
        alice_outcome,
        bob_outcome,
        eliminated,
        survivors: remaining,
    })
}

/// Identify the true state, consuming one copy per round until a single
/// candidate remains. Uses at most `N - 1` copies.
pub fn distinguish(
    ensemble: &EnsemblePure,
    true_index: usize,
    seed: u64,
) -> Result<ProtocolResult> {
    if true_index >= ensemble.len() {
        return Err(Error::InvalidInput(format!(
            "true index {true_index} out of range for {} states",
            ensemble.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut survivors: Vec<usize> = (0..ensemble.len()).collect();
    let mut transcripts = Vec::new();
    while survivors.len() > 1 {
        let transcript = run_round(
            ensemble,
            &survivors,
            true_index,
            transcripts.len() + 1,
            &mut rng,
        )?;
        survivors = transcript.survivors.clone();
        transcripts.push(transcript);
    }
    let copies_used = transcripts.len();
    assert!(
        copies_used + 1 <= ensemble.len().max(1),
        "used {copies_used} copies for {} states",
        ensemble.len()
    );
    let identified_index = survivors[0];
    Ok(ProtocolResult {
        identified_index,
        identified_label: ensemble.labels[identified_index].clone(),
        copies_used,
        transcripts,
    })
}

/// Aggregate statistics over repeated identification trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialStats {
    pub trials: usize,
    pub successes: usize,
    /// copies_used → number of trials.
    pub histogram: BTreeMap<usize, usize>,
}

impl TrialStats {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            return 1.0;
        }
        self.successes as f64 / self.trials as f64
    }

    pub fn max_copies_used(&self) -> usize {
        self.histogram.keys().copied().max().unwrap_or(0)
    }
}

/// Run seeded trials. When `true_index` is `None` the prepared state is
/// drawn uniformly per trial; per-trial seeds are derived from `seed`,
/// so trials are individually reproducible.
pub fn run_trials(
    ensemble: &EnsemblePure,
    true_index: Option<usize>,
    trials: usize,
    seed: u64,
) -> Result<TrialStats> {
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let mut histogram = BTreeMap::new();
    let mut successes = 0;
    for t in 0..trials {
        let trial_seed = derive_seed(seed, t as u64);
        let prepared = match true_index {
            Some(k) => {
                if k >= ensemble.len() {
                    return Err(Error::InvalidInput(format!(
                        "true index {k} out of range for {} states",
                        ensemble.len()
                    )));
                }
                k
            }
            None => {
                let mut picker = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, u64::MAX));
                picker.gen_range(0..ensemble.len())
            }
        };
        let result = distinguish(ensemble, prepared, trial_seed)?;
        if result.identified_index == prepared {
            successes += 1;
        }
        *histogram.entry(result.copies_used).or_insert(0) += 1;
    }
    Ok(TrialStats { trials, successes, histogram })
}

/// Histogram of copies used over seeded trials with a uniformly random
/// prepared state.
pub fn copies_histogram(
    ensemble: &EnsemblePure,
    trials: usize,
    seed: u64,
) -> Result<BTreeMap<usize, usize>> {
    Ok(run_trials(ensemble, None, trials, seed)?.histogram)
}

/// Born-rule sampling from unnormalized weights. Negative rounding
/// residue is clamped; weights must not be all zero.
fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let clamped: Vec<f64> = weights.iter().map(|&w| w.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    assert!(total > 0.0, "cannot sample from all-zero weights");
    let mut draw = rng.gen::<f64>() * total;
    for (i, &w) in clamped.iter().enumerate() {
        if w == 0.0 {
            continue; // zero-probability outcomes are never selected
        }
        draw -= w;
        if draw <= 0.0 {
            return i;
        }
    }
    // rounding spill: return the last positive-weight outcome
    clamped
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("positive total implies a positive weight")
}
