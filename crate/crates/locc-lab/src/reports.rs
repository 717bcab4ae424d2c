//! Ensemble files, the many-copy distinguishability classifier, and
//! machine-readable reports.
//!
//! Reports are deterministic for a fixed seed: every random draw is
//! derived from the configured seed, struct fields serialize in a fixed
//! order, and the timestamp is the only varying field (suppressible).
//!
//! Every orthogonal ensemble falls into one of three many-copy classes:
//! (a) perfectly distinguishable by local measurements, (b) conclusively
//! distinguishable (every member identifiable with nonzero probability),
//! or (c) not even that. Pure ensembles are always class (a) — the
//! elimination protocol settles them constructively. For mixed
//! ensembles, the classifier runs witness searches at increasing copy
//! counts; "c" is only ever reported as a *candidate*, since the search
//! is heuristic, unless the ensemble's UPB structure makes the verdict
//! analytic.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::hilbert::{DensityOperator, PureState, StateJson};
use crate::protocol::{run_trials, EnsemblePure, TrialStats};
use crate::upb::{UpbCandidate, UpbJson, UpbVerdict};
use crate::witness::{conclusive_witness, SeesawConfig, WitnessVerdict};
use crate::{derive_seed, Error, Result};

/// Output format for CLI reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Knobs shared by the report-producing commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub restarts: usize,
    pub max_copies: usize,
    pub format: OutputFormat,
    /// Include a unix-seconds timestamp in the report.
    pub timestamp: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            trials: 1000,
            restarts: 200,
            max_copies: 2,
            format: OutputFormat::Json,
            timestamp: true,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.restarts == 0 || self.max_copies == 0 {
            return Err(Error::InvalidInput(
                "trials, restarts and max-copies must be positive".into(),
            ));
        }
        Ok(())
    }

    fn now(&self) -> Option<u64> {
        self.timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
    }
}

/* Ensemble files ***********************************************************/

/// On-disk ensemble: a list of states (pure `amplitudes` or density
/// `matrix` entries), optional labels, optional construction provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub name: String,
    pub states: Vec<StateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Records that an ensemble file was generated as {σ^⊗n, ρ^⊗n} from a
/// UPB, which lets the classifier back its verdict analytically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: String,
    pub upb: UpbJson,
    pub copies: usize,
    /// Which entry of `states` is the normalized span projector.
    pub sigma_index: usize,
}

pub const PROVENANCE_SIGMA_RHO: &str = "upb-sigma-rho";

/// Parsed payload of an ensemble file.
pub enum LoadedEnsemble {
    Pure(EnsemblePure),
    Mixed { operators: Vec<DensityOperator>, labels: Vec<String> },
}

impl EnsembleFile {
    pub fn load(path: &Path) -> Result<EnsembleFile> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    fn labels_or_indices(&self) -> Vec<String> {
        match &self.labels {
            Some(l) if l.len() == self.states.len() => l.clone(),
            _ => (0..self.states.len()).map(|i| i.to_string()).collect(),
        }
    }

    /// Interpret the file. All-amplitude files load as pure ensembles;
    /// anything containing a `matrix` entry loads as density operators
    /// (pure entries are promoted to rank-one operators).
    pub fn parse(&self) -> Result<LoadedEnsemble> {
        if self.states.is_empty() {
            return Err(Error::InvalidInput("ensemble file has no states".into()));
        }
        let labels = self.labels_or_indices();
        let all_pure = self.states.iter().all(|s| s.amplitudes.is_some());
        if all_pure {
            let states = self
                .states
                .iter()
                .map(PureState::from_json)
                .collect::<Result<Vec<_>>>()?;
            return Ok(LoadedEnsemble::Pure(EnsemblePure::new(states, labels)?));
        }
        let operators = self
            .states
            .iter()
            .map(|s| {
                if s.matrix.is_some() {
                    DensityOperator::from_json(s)
                } else {
                    Ok(PureState::from_json(s)?.density())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LoadedEnsemble::Mixed { operators, labels })
    }
}

/* Distinguish reports ******************************************************/

#[derive(Debug, Clone, Serialize)]
pub struct DistinguishReport {
    pub ensemble_id: String,
    pub n_states: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_index: Option<usize>,
    pub success_rate: f64,
    pub max_copies_used: usize,
    /// copies_used → trial count.
    pub histogram: BTreeMap<usize, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

/// Run the elimination protocol over seeded trials and summarize.
/// Rejects files containing density matrices.
pub fn cmd_distinguish(
    file: &EnsembleFile,
    true_index: Option<usize>,
    cfg: &RunConfig,
) -> Result<DistinguishReport> {
    cfg.validate()?;
    let ensemble = match file.parse()? {
        LoadedEnsemble::Pure(e) => e,
        LoadedEnsemble::Mixed { .. } => {
            return Err(Error::InvalidInput(
                "ensemble contains density matrices; the elimination protocol needs pure \
                 states — use `classify` instead"
                    .into(),
            ))
        }
    };
    let stats = run_trials(&ensemble, true_index, cfg.trials, cfg.seed)?;
    Ok(DistinguishReport {
        ensemble_id: file.name.clone(),
        n_states: ensemble.len(),
        trials: stats.trials,
        seed: cfg.seed,
        true_index,
        success_rate: stats.success_rate(),
        max_copies_used: stats.max_copies_used(),
        histogram: stats.histogram,
        timestamp: cfg.now(),
    })
}

impl DistinguishReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("ensemble_id,trials,seed,success_rate,copies_used,frequency\n");
        for (copies, freq) in &self.histogram {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.ensemble_id, self.trials, self.seed, self.success_rate, copies, freq
            ));
        }
        out
    }
}

/* Classification ***********************************************************/

/// Many-copy distinguishability class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassLabel {
    #[serde(rename = "a")]
    PerfectlyDistinguishable,
    #[serde(rename = "b")]
    ConclusivelyDistinguishable,
    #[serde(rename = "c-candidate")]
    CCandidate,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessEvidenceRow {
    pub n: usize,
    pub target: usize,
    pub target_label: String,
    pub verdict: WitnessVerdict,
    pub best_overlap: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub success_rate: f64,
    pub max_copies_used: usize,
    pub histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationEvidence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<TrialSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness_rows: Vec<WitnessEvidenceRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationResult {
    pub ensemble_id: String,
    pub n_copies_tested: Vec<usize>,
    pub class_label: ClassLabel,
    /// Set when a `c-candidate` verdict is not merely heuristic: the
    /// ensemble verifiably consists of a UPB span projector and
    /// complement-supported states, for which no conclusive local
    /// identification exists at any copy count.
    pub upb_certified: bool,
    pub evidence: ClassificationEvidence,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

/// Classify an ensemble by its many-copy local distinguishability.
///
/// Pure ensembles run the elimination protocol and come out class (a).
/// Mixed ensembles get a witness search per target at every copy count
/// up to the cap: all targets witnessed somewhere → class (b); some
/// target never witnessed → c-candidate. Ambiguous verdicts (undecided
/// searches that block both readings) error as non-convergence.
pub fn cmd_classify(file: &EnsembleFile, cfg: &RunConfig) -> Result<ClassificationResult> {
    cfg.validate()?;
    let loaded = file.parse()?;
    let (operators, labels) = match loaded {
        LoadedEnsemble::Pure(ensemble) => {
            return classify_pure(file, &ensemble, cfg);
        }
        LoadedEnsemble::Mixed { operators, labels } => (operators, labels),
    };

    // rank-one operators are pure states in disguise
    if let Some(ensemble) = as_pure_ensemble(&operators, &labels)? {
        return classify_pure(file, &ensemble, cfg);
    }

    let warm_base = provenance_members(file);
    let mut rows = Vec::new();
    let mut found = vec![false; operators.len()];
    let mut always_missing = vec![true; operators.len()];
    let mut any_undecided = false;

    for n in 1..=cfg.max_copies {
        let ops_n = operators
            .iter()
            .map(|op| op.tensor_power(n))
            .collect::<Result<Vec<_>>>()?;
        let warm_n: Vec<_> = warm_base
            .iter()
            .map(|m| {
                let mut p = m.clone();
                for _ in 1..n {
                    p = p.tensor(m);
                }
                p
            })
            .collect();
        for target in 0..operators.len() {
            let seed = derive_seed(cfg.seed, (n * 1009 + target) as u64);
            let seesaw = SeesawConfig {
                restarts: cfg.restarts,
                seed,
                warm_starts: warm_n.clone(),
                ..Default::default()
            };
            let report = conclusive_witness(&ops_n, target, &seesaw)?;
            match report.verdict {
                WitnessVerdict::WitnessFound => {
                    found[target] = true;
                    always_missing[target] = false;
                }
                WitnessVerdict::NoWitnessHeuristic => {}
                WitnessVerdict::Undecided => {
                    always_missing[target] = false;
                    any_undecided = true;
                }
            }
            rows.push(WitnessEvidenceRow {
                n,
                target,
                target_label: labels[target].clone(),
                verdict: report.verdict,
                best_overlap: report.best_overlap,
                seed,
            });
        }
    }

    let class_label = if found.iter().all(|&f| f) {
        ClassLabel::ConclusivelyDistinguishable
    } else if always_missing.iter().any(|&m| m) {
        ClassLabel::CCandidate
    } else {
        debug_assert!(any_undecided);
        return Err(Error::NonConvergence(
            "classification",
            "witness searches returned undecided verdicts; raise --restarts".into(),
        ));
    };

    let upb_certified = class_label == ClassLabel::CCandidate
        && certify_upb_structure(file, &operators, cfg)?;

    Ok(ClassificationResult {
        ensemble_id: file.name.clone(),
        n_copies_tested: (1..=cfg.max_copies).collect(),
        class_label,
        upb_certified,
        evidence: ClassificationEvidence { protocol: None, witness_rows: rows },
        seed: cfg.seed,
        timestamp: cfg.now(),
    })
}

fn classify_pure(
    file: &EnsembleFile,
    ensemble: &EnsemblePure,
    cfg: &RunConfig,
) -> Result<ClassificationResult> {
    let stats = run_trials(ensemble, None, cfg.trials, cfg.seed)?;
    if stats.successes != stats.trials {
        return Err(Error::NonConvergence(
            "elimination protocol",
            format!("{} of {} trials misidentified", stats.trials - stats.successes, stats.trials),
        ));
    }
    Ok(ClassificationResult {
        ensemble_id: file.name.clone(),
        n_copies_tested: vec![1],
        class_label: ClassLabel::PerfectlyDistinguishable,
        upb_certified: false,
        evidence: ClassificationEvidence {
            protocol: Some(summarize(&stats)),
            witness_rows: Vec::new(),
        },
        seed: cfg.seed,
        timestamp: cfg.now(),
    })
}

fn summarize(stats: &TrialStats) -> TrialSummary {
    TrialSummary {
        trials: stats.trials,
        success_rate: stats.success_rate(),
        max_copies_used: stats.max_copies_used(),
        histogram: stats.histogram.clone(),
    }
}

/// Reinterpret rank-one density operators as a pure ensemble; `None`
/// when any operator is genuinely mixed.
fn as_pure_ensemble(
    operators: &[DensityOperator],
    labels: &[String],
) -> Result<Option<EnsemblePure>> {
    let mut states = Vec::with_capacity(operators.len());
    for op in operators {
        if op.rank(1e-9) != 1 {
            return Ok(None);
        }
        let eig = op.matrix().clone().symmetric_eigen();
        let top = (0..eig.eigenvalues.len())
            .max_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap())
            .unwrap();
        let v = eig.eigenvectors.column(top).into_owned();
        states.push(PureState::normalized(op.shape(), v)?);
    }
    Ok(Some(EnsemblePure::new(states, labels.to_vec())?))
}

fn provenance_members(file: &EnsembleFile) -> Vec<crate::hilbert::ProductState> {
    file.provenance
        .as_ref()
        .and_then(|p| UpbCandidate::from_json(&p.upb).ok())
        .map(|u| u.members().to_vec())
        .unwrap_or_default()
}

/// Check that the file really is a {σ^⊗n, ρ^⊗n, ...} family over a UPB:
/// the recorded source must verify as a UPB (exact orthogonality plus
/// the heuristic complement search at a single copy — tensor powers of
/// UPBs are again UPBs), the σ entry must equal the normalized projector
/// onto the n-copy span, and every other state must live in its
/// complement.
fn certify_upb_structure(
    file: &EnsembleFile,
    operators: &[DensityOperator],
    cfg: &RunConfig,
) -> Result<bool> {
    let Some(prov) = &file.provenance else {
        return Ok(false);
    };
    if prov.kind != PROVENANCE_SIGMA_RHO || prov.sigma_index >= operators.len() {
        return Ok(false);
    }
    let Ok(upb) = UpbCandidate::from_json(&prov.upb) else {
        return Ok(false);
    };
    let seesaw = SeesawConfig {
        restarts: cfg.restarts,
        seed: derive_seed(cfg.seed, 0xCE27),
        ..Default::default()
    };
    if !matches!(crate::upb::verify_upb(&upb, &seesaw)?, UpbVerdict::Verified { .. }) {
        return Ok(false);
    }
    let span_n = upb.span()?.tensor_power(prov.copies)?;
    let sigma = span_n.normalized_projector()?;
    if (sigma.matrix() - operators[prov.sigma_index].matrix()).norm() > 1e-8 {
        return Ok(false);
    }
    let p_span = span_n.projector();
    for (j, op) in operators.iter().enumerate() {
        if j == prov.sigma_index {
            continue;
        }
        if (&p_span * op.matrix()).trace().re.abs() > 1e-8 {
            return Ok(false);
        }
    }
    Ok(true)
}

impl ClassificationResult {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fixed columns: `ensemble_id,n,target,verdict,best_overlap,seed`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("ensemble_id,n,target,verdict,best_overlap,seed\n");
        for row in &self.evidence.witness_rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.ensemble_id, row.n, row.target_label, row.verdict, row.best_overlap, row.seed
            ));
        }
        out
    }
}

/* UPB command reports ******************************************************/

#[derive(Debug, Clone, Serialize)]
pub struct UpbVerifyReport {
    pub name: String,
    pub dim_a: usize,
    pub dim_b: usize,
    pub members: usize,
    pub verdict: String,
    pub orthogonality_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_complement_overlap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

pub fn cmd_upb_verify(candidate: &UpbCandidate, cfg: &RunConfig) -> Result<UpbVerifyReport> {
    cfg.validate()?;
    let seesaw = SeesawConfig { restarts: cfg.restarts, seed: cfg.seed, ..Default::default() };
    let verdict = crate::upb::verify_upb(candidate, &seesaw)?;
    let shape = candidate.shape();
    let mut report = UpbVerifyReport {
        name: candidate.name().to_string(),
        dim_a: shape.dim_a,
        dim_b: shape.dim_b,
        members: candidate.len(),
        verdict: String::new(),
        orthogonality_defect: candidate.orthogonality_defect(),
        best_complement_overlap: None,
        restarts_used: None,
        detail: None,
        seed: cfg.seed,
        timestamp: cfg.now(),
    };
    match verdict {
        UpbVerdict::Verified { best_complement_overlap, restarts_used } => {
            report.verdict = "verified-upb".into();
            report.best_complement_overlap = Some(best_complement_overlap);
            report.restarts_used = Some(restarts_used);
        }
        UpbVerdict::NotOrthogonal { i, j, overlap } => {
            report.verdict = "not-orthogonal".into();
            report.detail = Some(format!("members {i} and {j} overlap at {overlap:.3e}"));
        }
        UpbVerdict::ProductStateFound { overlap, .. } => {
            report.verdict = "product-state-found".into();
            report.best_complement_overlap = Some(overlap);
            report.detail = Some("complement contains a product state; not a UPB".into());
        }
    }
    Ok(report)
}

impl UpbVerifyReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "name,dim_a,dim_b,members,verdict,orthogonality_defect,best_complement_overlap,seed\n",
        );
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            self.name,
            self.dim_a,
            self.dim_b,
            self.members,
            self.verdict,
            self.orthogonality_defect,
            self.best_complement_overlap
                .map_or(String::new(), |v| v.to_string()),
            self.seed
        ));
        out
    }
}

/// Package a sigma/rho ensemble as an on-disk ensemble file with
/// provenance.
pub fn sigma_rho_to_file(ens: &crate::upb::SigmaRhoEnsemble) -> EnsembleFile {
    EnsembleFile {
        name: format!("{}-sigma-rho-n{}", ens.source.name(), ens.copies),
        states: vec![ens.sigma.to_json(), ens.rho.to_json()],
        labels: Some(vec!["sigma".into(), "rho".into()]),
        provenance: Some(Provenance {
            kind: PROVENANCE_SIGMA_RHO.into(),
            upb: ens.source.to_json(),
            copies: ens.copies,
            sigma_index: 0,
        }),
    }
}
