//! RF-chain-to-branch selection, MMSE baseband combining and link metrics.
//!
//! A *branch* is whatever an RF chain can be switched onto: an RAA ray or an
//! analog codeword of a ULA sector / UCA. Every architecture is reduced to a
//! [`LinkProblem`]: one branch-space channel vector per user plus a group
//! label per branch and per user. A user may only combine RF chains whose
//! branch belongs to its own group (its serving sector); interference is
//! still collected from every user through those chains. The RAA and the UCA
//! have a single group.
//!
//! For user `k` with combiner `f_k` and selected rows `S`,
//!
//! ```text
//! SINR_k = P |f_kᴴ S g_k|² / (P Σ_{i≠k} |f_kᴴ S g_i|² + Σ_r w_r |f_{k,r}|²)
//! ```
//!
//! where `w_r` is the per-branch noise factor (`M` for all branches unless a
//! physical noise model is requested).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{assign_sector, project_raa, project_uca, project_ula, BeamSpaceChannel, PathSet};
use crate::geometry::{wrap_angle, RaaParams, UcaParams, UlaSectorParams};
use crate::pattern::{Codebook, ElementPattern};
use crate::{Architecture, Error, Result};

/// Exhaustive search limits.
pub const EXHAUSTIVE_MAX_BRANCHES: usize = 16;
pub const EXHAUSTIVE_MAX_RF_CHAINS: usize = 4;

/// Condition number above which the MMSE covariance is diagonally loaded.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative slack when comparing sum rates, so near-ties keep the earlier
/// (lexicographically smaller) candidate.
const TIE_RTOL: f64 = 1e-12;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Binary RF-chain-to-branch assignment, stored as the branch of each chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SelectionMatrix {
    num_branches: usize,
    assigned: Vec<usize>,
}

impl SelectionMatrix {
    /// Validates that every chain has one in-range branch and no branch is
    /// driven twice.
    pub fn new(num_branches: usize, assigned: Vec<usize>) -> Result<Self> {
        let mut used = vec![false; num_branches];
        for &b in &assigned {
            if b >= num_branches {
                return Err(Error::InvalidParameter(format!(
                    "branch {b} out of range for {num_branches} branches"
                )));
            }
            if std::mem::replace(&mut used[b], true) {
                return Err(Error::InvalidParameter(format!("branch {b} selected twice")));
            }
        }
        Ok(SelectionMatrix {
            num_branches,
            assigned,
        })
    }

    pub fn num_branches(&self) -> usize {
        self.num_branches
    }

    pub fn rf_chains(&self) -> usize {
        self.assigned.len()
    }

    /// Branch driven by each RF chain.
    pub fn assigned(&self) -> &[usize] {
        &self.assigned
    }

    /// Dense `N_RF × N_branches` 0/1 matrix.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.assigned
            .iter()
            .map(|&b| {
                let mut row = vec![0u8; self.num_branches];
                row[b] = 1;
                row
            })
            .collect()
    }

    /// Checks binary entries, unit row sums and column sums of at most one.
    pub fn satisfies_constraints(dense: &[Vec<u8>]) -> bool {
        let Some(cols) = dense.first().map(Vec::len) else {
            return true;
        };
        let binary = dense.iter().flatten().all(|&v| v <= 1);
        let rows = dense
            .iter()
            .all(|r| r.len() == cols && r.iter().map(|&v| v as usize).sum::<usize>() == 1);
        let columns = (0..cols).all(|c| dense.iter().map(|r| r[c] as usize).sum::<usize>() <= 1);
        binary && rows && columns
    }
}

/// Baseband combiners, one column of length `N_RF` per user.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingMatrix {
    columns: Vec<Vec<Complex64>>,
}

impl BeamformingMatrix {
    pub fn from_columns(columns: Vec<Vec<Complex64>>) -> Self {
        BeamformingMatrix { columns }
    }

    pub fn users(&self) -> usize {
        self.columns.len()
    }

    pub fn rf_chains(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, k: usize) -> &[Complex64] {
        &self.columns[k]
    }

    pub fn columns(&self) -> &[Vec<Complex64>] {
        &self.columns
    }

    /// Replaces `f_k` with `c·f_k`.
    pub fn scaled(&self, k: usize, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.columns[k] {
            *v *= c;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    Greedy,
    MinAngle,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Greedy => "greedy",
            Strategy::MinAngle => "min_angle",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "greedy" => Ok(Strategy::Greedy),
            "min_angle" | "min-angle" => Ok(Strategy::MinAngle),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy `{other}` (expected exhaustive, greedy or min_angle)"
            ))),
        }
    }
}

/// Per-branch noise factor of the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// The RAA per-branch factor `M` applied to every codeword.
    #[default]
    AsWritten,
    /// Each codeword's combining gain `‖a_n‖²`.
    Physical,
}

/// Outcome of evaluating one selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkReport {
    pub architecture: Architecture,
    pub snr_db: f64,
    pub sinr: Vec<f64>,
    pub sum_rate: f64,
    pub selection: Vec<usize>,
    pub strategy: Option<Strategy>,
}

impl LinkReport {
    fn new(architecture: Architecture, snr: f64, sinr: Vec<f64>, selection: Vec<usize>) -> Self {
        let sum_rate = sum_rate(&sinr);
        LinkReport {
            architecture,
            snr_db: linear_to_db(snr),
            sinr,
            sum_rate,
            selection,
            strategy: None,
        }
    }

    pub fn sinr_db(&self) -> Vec<f64> {
        self.sinr.iter().map(|&s| linear_to_db(s)).collect()
    }
}

/// `Σ_k log2(1 + SINR_k)`.
pub fn sum_rate(sinr: &[f64]) -> f64 {
    sinr.iter().map(|s| (1.0 + s).log2()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub selection: SelectionMatrix,
    pub beamformer: BeamformingMatrix,
    pub report: LinkReport,
}

fn inner(f: &[Complex64], y: &[Complex64]) -> Complex64 {
    f.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// The SINR expression on already-selected rows.
fn sinr_on_rows(rows: &[Vec<Complex64>], f: &[Complex64], noise: &[f64], snr: f64, k: usize) -> Result<f64> {
    if f.iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(Error::InvalidBeamformer { user: k });
    }
    let signal = snr * inner(f, &rows[k]).norm_sqr();
    let interference: f64 = rows
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, y)| inner(f, y).norm_sqr())
        .sum::<f64>()
        * snr;
    let noise_power: f64 = f.iter().zip(noise).map(|(v, w)| w * v.norm_sqr()).sum();
    Ok(signal / (interference + noise_power))
}

fn selected_rows(channels: &[Vec<Complex64>], rows: &[usize]) -> Vec<Vec<Complex64>> {
    channels
        .iter()
        .map(|g| rows.iter().map(|&b| g[b]).collect())
        .collect()
}

fn check_dims(channels: &[Vec<Complex64>], sel: &SelectionMatrix, f: &BeamformingMatrix) -> Result<()> {
    if channels.iter().any(|h| h.len() != sel.num_branches()) {
        return Err(Error::DimensionMismatch(format!(
            "channels must have {} branch entries",
            sel.num_branches()
        )));
    }
    if f.users() != channels.len() || f.columns().iter().any(|c| c.len() != sel.rf_chains()) {
        return Err(Error::DimensionMismatch(format!(
            "beamformer must be {} x {}",
            sel.rf_chains(),
            channels.len()
        )));
    }
    Ok(())
}

/// SINR of user `k` for the omnicell RAA; noise factor `m` per selected ray.
pub fn sinr_raa(
    channels: &[BeamSpaceChannel],
    sel: &SelectionMatrix,
    f: &BeamformingMatrix,
    snr: f64,
    m: usize,
    k: usize,
) -> Result<f64> {
    let h: Vec<Vec<Complex64>> = channels.iter().map(|c| c.values.clone()).collect();
    check_dims(&h, sel, f)?;
    let rows = selected_rows(&h, sel.assigned());
    sinr_on_rows(&rows, f.column(k), &vec![m as f64; sel.rf_chains()], snr, k)
}

/// SINR of user `k` for a codebook-based baseline. `channels` are the
/// element-space channels of every user through user `k`'s serving array.
pub fn sinr_baseline(
    channels: &[BeamSpaceChannel],
    codebook: &Codebook,
    sel: &SelectionMatrix,
    f: &BeamformingMatrix,
    snr: f64,
    m: usize,
    k: usize,
) -> Result<f64> {
    let g: Vec<Vec<Complex64>> = channels.iter().map(|c| codebook.project(&c.values)).collect();
    check_dims(&g, sel, f)?;
    let rows = selected_rows(&g, sel.assigned());
    sinr_on_rows(&rows, f.column(k), &vec![m as f64; sel.rf_chains()], snr, k)
}

/// Solves `C x = y` for Hermitian positive definite `C`, loading the
/// diagonal when the condition number exceeds [`MAX_CONDITION`].
fn solve_hermitian(mut c: DMatrix<Complex64>, y: DVector<Complex64>) -> DVector<Complex64> {
    let n = c.nrows();
    let eig = c.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if lo.is_nan() || lo <= 0.0 || hi / lo > MAX_CONDITION {
        let trace: f64 = (0..n).map(|i| c[(i, i)].re).sum();
        let load = 1e-9 * trace / n as f64;
        log::warn!(
            "MMSE covariance ill-conditioned (cond ≈ {:.3e}); loading diagonal by {load:.3e}",
            hi / lo
        );
        for i in 0..n {
            c[(i, i)] += Complex64::new(load, 0.0);
        }
    }
    match c.clone().cholesky() {
        Some(ch) => ch.solve(&y),
        None => c.lu().solve(&y).unwrap_or_else(|| DVector::zeros(n)),
    }
}

/// MMSE combiner on selected rows: `f_k = C_k⁻¹ y_k` with
/// `C_k = Σ_{i≠k} y_i y_iᴴ + diag(w)/P`.
fn mmse_on_rows(rows: &[Vec<Complex64>], noise: &[f64], snr: f64, k: usize) -> Vec<Complex64> {
    let n = noise.len();
    if n == 0 {
        return Vec::new();
    }
    let mut c = DMatrix::<Complex64>::zeros(n, n);
    for (i, y) in rows.iter().enumerate() {
        if i == k {
            continue;
        }
        for r in 0..n {
            for s in 0..n {
                c[(r, s)] += y[r] * y[s].conj();
            }
        }
    }
    for (r, w) in noise.iter().enumerate() {
        c[(r, r)] += Complex64::new(w / snr, 0.0);
    }
    let x = solve_hermitian(c, DVector::from_column_slice(&rows[k]));
    x.iter().copied().collect()
}

/// MMSE combiners for channels that share one group (the RAA, or baselines
/// after codebook projection).
pub fn mmse_beamformer(
    channels: &[Vec<Complex64>],
    sel: &SelectionMatrix,
    snr: f64,
    m: usize,
) -> BeamformingMatrix {
    let rows = selected_rows(channels, sel.assigned());
    let noise = vec![m as f64; sel.rf_chains()];
    BeamformingMatrix::from_columns(
        (0..channels.len())
            .map(|k| mmse_on_rows(&rows, &noise, snr, k))
            .collect(),
    )
}

/// One architecture and one channel realisation in branch space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkProblem {
    architecture: Architecture,
    channels: Vec<Vec<Complex64>>,
    branch_group: Vec<usize>,
    user_group: Vec<usize>,
    noise: Vec<f64>,
    branch_angles: Vec<f64>,
}

impl LinkProblem {
    pub fn new(
        architecture: Architecture,
        channels: Vec<Vec<Complex64>>,
        branch_group: Vec<usize>,
        user_group: Vec<usize>,
        noise: Vec<f64>,
        branch_angles: Vec<f64>,
    ) -> Result<Self> {
        let b = branch_group.len();
        if channels.is_empty() {
            return Err(Error::InvalidParameter(
                "link problem needs at least one user".into(),
            ));
        }
        if channels.iter().any(|h| h.len() != b) || noise.len() != b || branch_angles.len() != b {
            return Err(Error::DimensionMismatch(format!(
                "every per-branch vector must have {b} entries"
            )));
        }
        if user_group.len() != channels.len() {
            return Err(Error::DimensionMismatch(
                "one group label per user required".into(),
            ));
        }
        if noise.iter().any(|w| w.is_nan() || *w <= 0.0) {
            return Err(Error::InvalidParameter("noise factors must be positive".into()));
        }
        Ok(LinkProblem {
            architecture,
            channels,
            branch_group,
            user_group,
            noise,
            branch_angles,
        })
    }

    /// Omnicell RAA: branches are rays, noise factor `M` per ray.
    pub fn raa(users: &[PathSet], raa: &RaaParams, pattern: &ElementPattern) -> Result<Self> {
        let channels = users
            .iter()
            .map(|u| project_raa(u, raa, pattern).values)
            .collect();
        let n = raa.num_rays();
        Self::new(
            Architecture::Raa,
            channels,
            vec![0; n],
            vec![0; users.len()],
            vec![raa.elements_per_ray() as f64; n],
            raa.orientations().to_vec(),
        )
    }

    /// Sectored ULA: branches are `(sector, codeword)` pairs ordered by
    /// sector then codeword; each user is served by its assigned sector.
    pub fn ula(
        users: &[PathSet],
        ula: &UlaSectorParams,
        codebook: &Codebook,
        pattern: &ElementPattern,
        noise: NoiseModel,
    ) -> Result<Self> {
        let sectors = ula.num_sectors();
        let per = codebook.num_codewords();
        let channels = users
            .iter()
            .map(|u| {
                (0..sectors)
                    .flat_map(|p| codebook.project(&project_ula(u, ula, pattern, p).values))
                    .collect()
            })
            .collect();
        let branch_group = (0..sectors).flat_map(|p| std::iter::repeat_n(p, per)).collect();
        let user_group = users.iter().map(|u| assign_sector(u, ula, pattern)).collect();
        let weights = match noise {
            NoiseModel::AsWritten => vec![ula.elements_per_array() as f64; per],
            NoiseModel::Physical => codebook.codeword_gains(),
        };
        let noise = weights.repeat(sectors);
        let branch_angles = (0..sectors)
            .flat_map(|p| {
                codebook
                    .target_angles
                    .iter()
                    .map(move |t| wrap_angle(ula.boresight(p) + t))
            })
            .collect();
        Self::new(
            Architecture::Ula,
            channels,
            branch_group,
            user_group,
            noise,
            branch_angles,
        )
    }

    /// UCA with a parametric codebook. `noise_factor` is used in the
    /// as-written model.
    pub fn uca(
        users: &[PathSet],
        uca: &UcaParams,
        codebook: &Codebook,
        noise: NoiseModel,
        noise_factor: f64,
    ) -> Result<Self> {
        let channels = users
            .iter()
            .map(|u| codebook.project(&project_uca(u, uca).values))
            .collect();
        let b = codebook.num_codewords();
        let noise = match noise {
            NoiseModel::AsWritten => vec![noise_factor; b],
            NoiseModel::Physical => codebook.codeword_gains(),
        };
        Self::new(
            Architecture::Uca,
            channels,
            vec![0; b],
            vec![0; users.len()],
            noise,
            codebook.target_angles.clone(),
        )
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn num_users(&self) -> usize {
        self.channels.len()
    }

    pub fn num_branches(&self) -> usize {
        self.branch_group.len()
    }

    /// Branch-space channel of every user.
    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.channels
    }

    pub fn user_group(&self, k: usize) -> usize {
        self.user_group[k]
    }

    pub fn branch_group(&self, b: usize) -> usize {
        self.branch_group[b]
    }

    pub fn branch_angles(&self) -> &[f64] {
        &self.branch_angles
    }

    fn check_selection(&self, sel: &SelectionMatrix) -> Result<()> {
        if sel.num_branches() != self.num_branches() {
            return Err(Error::DimensionMismatch(format!(
                "selection over {} branches, problem has {}",
                sel.num_branches(),
                self.num_branches()
            )));
        }
        Ok(())
    }

    /// MMSE combiners; chains outside a user's group get zero weight.
    pub fn mmse(&self, sel: &SelectionMatrix, snr: f64) -> Result<BeamformingMatrix> {
        self.check_selection(sel)?;
        let columns = (0..self.num_users())
            .map(|k| {
                let group = self.user_group[k];
                let chains: Vec<usize> = (0..sel.rf_chains())
                    .filter(|&r| self.branch_group[sel.assigned()[r]] == group)
                    .collect();
                let branches: Vec<usize> = chains.iter().map(|&r| sel.assigned()[r]).collect();
                let rows = selected_rows(&self.channels, &branches);
                let noise: Vec<f64> = branches.iter().map(|&b| self.noise[b]).collect();
                let local = mmse_on_rows(&rows, &noise, snr, k);
                let mut f = vec![Complex64::new(0.0, 0.0); sel.rf_chains()];
                for (r, v) in chains.into_iter().zip(local) {
                    f[r] = v;
                }
                f
            })
            .collect();
        Ok(BeamformingMatrix::from_columns(columns))
    }

    /// SINR of user `k` for an arbitrary combiner.
    pub fn sinr(&self, sel: &SelectionMatrix, f: &BeamformingMatrix, snr: f64, k: usize) -> Result<f64> {
        self.check_selection(sel)?;
        check_dims(&self.channels, sel, f)?;
        let rows = selected_rows(&self.channels, sel.assigned());
        let noise: Vec<f64> = sel.assigned().iter().map(|&b| self.noise[b]).collect();
        sinr_on_rows(&rows, f.column(k), &noise, snr, k)
    }

    /// MMSE combining plus SINR for every user. A user with no RF chain in
    /// its group has zero SINR.
    ///
    /// The result does not depend on chain order: it is computed on the
    /// sorted branch set and the combiner rows are mapped back.
    pub fn evaluate(&self, sel: &SelectionMatrix, snr: f64) -> Result<(BeamformingMatrix, LinkReport)> {
        self.check_selection(sel)?;
        let mut order: Vec<usize> = (0..sel.rf_chains()).collect();
        order.sort_by_key(|&r| sel.assigned()[r]);
        let sorted = SelectionMatrix {
            num_branches: sel.num_branches(),
            assigned: order.iter().map(|&r| sel.assigned()[r]).collect(),
        };
        let f_sorted = self.mmse(&sorted, snr)?;
        let sinr = (0..self.num_users())
            .map(|k| match self.sinr(&sorted, &f_sorted, snr, k) {
                Ok(s) => Ok(s),
                Err(Error::InvalidBeamformer { .. }) => Ok(0.0),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<f64>>>()?;
        let columns = f_sorted
            .columns()
            .iter()
            .map(|col| {
                let mut out = vec![Complex64::new(0.0, 0.0); col.len()];
                for (pos, &r) in order.iter().enumerate() {
                    out[r] = col[pos];
                }
                out
            })
            .collect();
        let report = LinkReport::new(self.architecture, snr, sinr, sel.assigned().to_vec());
        Ok((BeamformingMatrix::from_columns(columns), report))
    }

    pub fn sum_rate(&self, sel: &SelectionMatrix, snr: f64) -> Result<f64> {
        Ok(self.evaluate(sel, snr)?.1.sum_rate)
    }

    fn outcome(&self, sel: SelectionMatrix, snr: f64, strategy: Strategy) -> Result<SelectionOutcome> {
        let (beamformer, mut report) = self.evaluate(&sel, snr)?;
        report.strategy = Some(strategy);
        Ok(SelectionOutcome {
            selection: sel,
            beamformer,
            report,
        })
    }

    fn check_chains(&self, rf_chains: usize) -> Result<()> {
        if rf_chains == 0 || rf_chains > self.num_branches() {
            return Err(Error::InvalidParameter(format!(
                "need 1..={} RF chains, got {rf_chains}",
                self.num_branches()
            )));
        }
        Ok(())
    }
}

/// Best assignment by enumeration. Since the sum rate does not depend on
/// chain order, only ascending branch tuples are visited; the first
/// (lexicographically smallest) tuple wins ties.
pub fn select_exhaustive(problem: &LinkProblem, snr: f64, rf_chains: usize) -> Result<SelectionOutcome> {
    problem.check_chains(rf_chains)?;
    let b = problem.num_branches();
    if b > EXHAUSTIVE_MAX_BRANCHES || rf_chains > EXHAUSTIVE_MAX_RF_CHAINS {
        return Err(Error::SizeGuard {
            branches: b,
            rf_chains,
            max_branches: EXHAUSTIVE_MAX_BRANCHES,
            max_rf_chains: EXHAUSTIVE_MAX_RF_CHAINS,
        });
    }
    let mut tuple: Vec<usize> = (0..rf_chains).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let sel = SelectionMatrix::new(b, tuple.clone())?;
        let rate = problem.sum_rate(&sel, snr)?;
        if best.as_ref().is_none_or(|(r, _)| rate > r * (1.0 + TIE_RTOL)) {
            best = Some((rate, tuple.clone()));
        }
        // next combination in lexicographic order
        let mut i = rf_chains;
        loop {
            if i == 0 {
                let (_, tuple) = best.expect("at least one candidate");
                return problem.outcome(SelectionMatrix::new(b, tuple)?, snr, Strategy::Exhaustive);
            }
            i -= 1;
            if tuple[i] < b - rf_chains + i {
                tuple[i] += 1;
                for j in i + 1..rf_chains {
                    tuple[j] = tuple[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Chain-by-chain greedy: each new chain takes the unused branch that
/// maximises the sum rate with MMSE recomputed over the chains assigned so
/// far. Ties go to the lowest branch index.
pub fn select_greedy(problem: &LinkProblem, snr: f64, rf_chains: usize) -> Result<SelectionOutcome> {
    problem.check_chains(rf_chains)?;
    let b = problem.num_branches();
    let mut assigned: Vec<usize> = Vec::with_capacity(rf_chains);
    let mut used = vec![false; b];
    for _ in 0..rf_chains {
        let mut best: Option<(f64, usize)> = None;
        for cand in (0..b).filter(|&c| !used[c]) {
            let mut trial = assigned.clone();
            trial.push(cand);
            let rate = problem.sum_rate(&SelectionMatrix::new(b, trial)?, snr)?;
            if best.is_none_or(|(r, _)| rate > r * (1.0 + TIE_RTOL)) {
                best = Some((rate, cand));
            }
        }
        let (_, pick) = best.expect("a free branch exists");
        used[pick] = true;
        assigned.push(pick);
    }
    problem.outcome(SelectionMatrix::new(b, assigned)?, snr, Strategy::Greedy)
}

/// Assigns each user's chain to the branch pointing closest to its dominant
/// path, within the user's group.
///
/// Chains `0..K` belong to users `0..K`. Users claim branches in order of
/// how close their nearest branch is (closer first, then lower user index),
/// so a contested branch goes to the closer user and the other takes its
/// next-nearest free branch. Chains beyond `K` take the unused branches with
/// the most channel energy summed over users.
pub fn select_min_angle(
    problem: &LinkProblem,
    users: &[PathSet],
    rf_chains: usize,
) -> Result<SelectionMatrix> {
    problem.check_chains(rf_chains)?;
    let k_users = problem.num_users();
    if users.len() != k_users {
        return Err(Error::DimensionMismatch(format!(
            "{} path sets for {k_users} users",
            users.len()
        )));
    }
    if rf_chains < k_users {
        return Err(Error::InvalidParameter(format!(
            "min-angle selection needs at least one RF chain per user ({rf_chains} < {k_users})"
        )));
    }
    let b = problem.num_branches();
    let angles = problem.branch_angles();
    let ranked: Vec<Vec<(f64, usize)>> = (0..k_users)
        .map(|k| {
            let dom = users[k].dominant_azimuth();
            let group = problem.user_group(k);
            let mut cands: Vec<(f64, usize)> = (0..b)
                .filter(|&br| problem.branch_group(br) == group)
                .map(|br| (wrap_angle(dom - angles[br]).abs(), br))
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cands
        })
        .collect();
    let mut claim_order: Vec<usize> = (0..k_users).collect();
    claim_order.sort_by(|&a, &b| {
        let da = ranked[a].first().map_or(f64::INFINITY, |c| c.0);
        let db = ranked[b].first().map_or(f64::INFINITY, |c| c.0);
        da.total_cmp(&db).then(a.cmp(&b))
    });
    let mut used = vec![false; b];
    let mut assigned = vec![usize::MAX; rf_chains];
    for &k in &claim_order {
        let pick = ranked[k]
            .iter()
            .map(|c| c.1)
            .find(|&br| !used[br])
            .or_else(|| (0..b).find(|&br| !used[br]))
            .expect("rf_chains <= branches leaves a free branch");
        used[pick] = true;
        assigned[k] = pick;
    }
    let mut residual: Vec<(f64, usize)> = (0..b)
        .filter(|&br| !used[br])
        .map(|br| {
            let energy = problem.channels().iter().map(|g| g[br].norm_sqr()).sum();
            (energy, br)
        })
        .collect();
    residual.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (slot, (_, br)) in assigned[k_users..].iter_mut().zip(residual) {
        *slot = br;
    }
    SelectionMatrix::new(b, assigned)
}

/// Min-angle selection for an RAA directly from path sets.
pub fn select_min_angle_raa(
    users: &[PathSet],
    raa: &RaaParams,
    pattern: &ElementPattern,
    rf_chains: usize,
) -> Result<SelectionMatrix> {
    let problem = LinkProblem::raa(users, raa, pattern)?;
    select_min_angle(&problem, users, rf_chains)
}

/// Runs a selection strategy and reports the resulting link.
pub fn evaluate_link(
    problem: &LinkProblem,
    users: &[PathSet],
    strategy: Strategy,
    snr: f64,
    rf_chains: usize,
) -> Result<LinkReport> {
    let outcome = match strategy {
        Strategy::Exhaustive => select_exhaustive(problem, snr, rf_chains)?,
        Strategy::Greedy => select_greedy(problem, snr, rf_chains)?,
        Strategy::MinAngle => {
            let sel = select_min_angle(problem, users, rf_chains)?;
            problem.outcome(sel, snr, Strategy::MinAngle)?
        }
    };
    Ok(outcome.report)
}
