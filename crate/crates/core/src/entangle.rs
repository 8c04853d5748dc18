//! Concurrence graphs and Gaussian-state inseparability checks.
//!
//! Every edge of a concurrence graph is a pair-emission process driven by
//! one pump. With all processes acting at once, the lossless evolution
//! generated by `H = iκ Σ G_ab (a_a† a_b† − a_a a_b)` is the Gaussian
//! unitary `S = diag(e^{rG}, e^{−rG})` in `(x₁…x_N, p₁…p_N)` ordering, so
//! vacuum evolves to `V = ½·diag(e^{2rG}, e^{−2rG})`. Vacuum variance is ½.
//!
//! Inseparability across a cut is tested with the PPT criterion: flip the
//! sign of the p quadratures on one side and look for a symplectic
//! eigenvalue below ½.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dispersion::Axis;
use crate::error::{QpmError, Result};

pub const VACUUM_VARIANCE: f64 = 0.5;
/// Slack on the uncertainty bound ν ≥ ½.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    /// Frequency tag, e.g. `"w0"`.
    pub label: String,
    pub polarization: Axis,
}

impl Mode {
    pub fn new(label: impl Into<String>, polarization: Axis) -> Self {
        Mode {
            label: label.into(),
            polarization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub coupling: f64,
    /// Pump frequency tag, e.g. `"w0+w1"`.
    pub pump: String,
    /// Nonlinear process tag, e.g. `"YZY"`.
    pub process: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceGraph {
    modes: Vec<Mode>,
    edges: Vec<Edge>,
}

impl ConcurrenceGraph {
    pub fn new(modes: Vec<Mode>, edges: Vec<Edge>) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(QpmError::InvalidArgument(format!(
                    "duplicate mode ({}, {})",
                    m.label, m.polarization
                )));
            }
        }
        for e in &edges {
            if e.a >= modes.len() || e.b >= modes.len() {
                return Err(QpmError::InvalidArgument(format!(
                    "edge ({}, {}) out of range for {} modes",
                    e.a,
                    e.b,
                    modes.len()
                )));
            }
            if !(e.coupling >= 0.0 && e.coupling.is_finite()) {
                return Err(QpmError::InvalidArgument(format!("coupling {}", e.coupling)));
            }
        }
        Ok(ConcurrenceGraph { modes, edges })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Connected components over the edge list (regardless of weight).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.modes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in &self.edges {
            let (ra, rb) = (root(&mut parent, e.a), root(&mut parent, e.b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut index_of = vec![usize::MAX; n];
        for i in 0..n {
            let r = root(&mut parent, i);
            if index_of[r] == usize::MAX {
                index_of[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[index_of[r]].push(i);
        }
        groups
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

/// The three concurrent processes of the quadripartite source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConcurrentProcess {
    Zzz,
    Yzy,
    Zyy,
}

impl ConcurrentProcess {
    pub fn tag(&self) -> &'static str {
        match self {
            ConcurrentProcess::Zzz => "ZZZ",
            ConcurrentProcess::Yzy => "YZY",
            ConcurrentProcess::Zyy => "ZYY",
        }
    }
}

/// One pair-emission channel of the quadripartite assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeTemplate {
    pub a: usize,
    pub b: usize,
    pub process: ConcurrentProcess,
    pub pump: &'static str,
}

/// Mode order: (ω0,Z), (ω0,Y), (ω1,Z), (ω1,Y).
pub const QUADRIPARTITE_MODES: [(&str, Axis); 4] =
    [("w0", Axis::Z), ("w0", Axis::Y), ("w1", Axis::Z), ("w1", Axis::Y)];

/// Default pump-to-pair assignment. The 2ω0 and 2ω1 pumps drive degenerate
/// ZZZ and ZYY emission; the ω0+ω1 pump drives the nondegenerate pairs of
/// all three processes (YZY in both polarization orders, ZZZ on the two Z
/// modes, ZYY on the two Y modes).
pub const DEFAULT_QUADRIPARTITE_ASSIGNMENT: [EdgeTemplate; 6] = [
    EdgeTemplate { a: 0, b: 0, process: ConcurrentProcess::Zzz, pump: "2w0" },
    EdgeTemplate { a: 1, b: 2, process: ConcurrentProcess::Yzy, pump: "w0+w1" },
    EdgeTemplate { a: 0, b: 3, process: ConcurrentProcess::Yzy, pump: "w0+w1" },
    EdgeTemplate { a: 0, b: 2, process: ConcurrentProcess::Zzz, pump: "w0+w1" },
    EdgeTemplate { a: 1, b: 3, process: ConcurrentProcess::Zyy, pump: "w0+w1" },
    EdgeTemplate { a: 3, b: 3, process: ConcurrentProcess::Zyy, pump: "2w1" },
];

pub fn build_quadripartite(k_zzz: f64, k_yzy: f64, k_zyy: f64) -> Result<ConcurrenceGraph> {
    build_quadripartite_with(k_zzz, k_yzy, k_zyy, &DEFAULT_QUADRIPARTITE_ASSIGNMENT)
}

pub fn build_quadripartite_with(
    k_zzz: f64,
    k_yzy: f64,
    k_zyy: f64,
    assignment: &[EdgeTemplate],
) -> Result<ConcurrenceGraph> {
    let modes = QUADRIPARTITE_MODES
        .iter()
        .map(|&(l, p)| Mode::new(l, p))
        .collect();
    let edges = assignment
        .iter()
        .map(|t| Edge {
            a: t.a,
            b: t.b,
            coupling: match t.process {
                ConcurrentProcess::Zzz => k_zzz,
                ConcurrentProcess::Yzy => k_yzy,
                ConcurrentProcess::Zyy => k_zyy,
            },
            pump: t.pump.to_string(),
            process: t.process.tag().to_string(),
        })
        .collect();
    ConcurrenceGraph::new(modes, edges)
}

/// G_ab = Σ κ over edges joining a and b; a self-loop adds κ to G_aa.
pub fn adjacency_matrix(graph: &ConcurrenceGraph) -> DMatrix<f64> {
    let n = graph.mode_count();
    let mut g = DMatrix::zeros(n, n);
    for e in graph.edges() {
        g[(e.a, e.b)] += e.coupling;
        if e.a != e.b {
            g[(e.b, e.a)] += e.coupling;
        }
    }
    g
}

/// Symplectic form for (x₁…x_N, p₁…p_N) ordering.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(QpmError::InvalidArgument(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    let asym = max_asymmetry(m);
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(QpmError::NonSymmetric(asym));
    }
    Ok(())
}

/// f(M) for real symmetric M through its eigendecomposition.
fn symmetric_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let q = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    let out = q * d * q.transpose();
    // Symmetrize away rounding.
    (&out + out.transpose()) * 0.5
}

/// exp(M) for real symmetric M.
pub fn expm_symmetric(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    Ok(symmetric_function(m, f64::exp))
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (n, n)).copy_from(b);
    out
}

/// S = diag(e^{rG}, e^{−rG}).
pub fn evolution_matrix(g: &DMatrix<f64>, r: f64) -> Result<DMatrix<f64>> {
    check_symmetric(g)?;
    let scaled = g * r;
    let plus = symmetric_function(&scaled, f64::exp);
    let minus = symmetric_function(&scaled, |x| (-x).exp());
    Ok(block_diag(&plus, &minus))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    v: DMatrix<f64>,
}

impl CovarianceState {
    pub fn vacuum(n: usize) -> Self {
        CovarianceState {
            v: DMatrix::identity(2 * n, 2 * n) * VACUUM_VARIANCE,
        }
    }

    /// Validates symmetry and the uncertainty principle.
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&v)?;
        if !v.nrows().is_multiple_of(2) || v.nrows() == 0 {
            return Err(QpmError::InvalidArgument(format!(
                "covariance matrix of size {} is not 2N x 2N",
                v.nrows()
            )));
        }
        let state = CovarianceState { v };
        let nu = state.symplectic_eigenvalues()?;
        if nu[0] < VACUUM_VARIANCE - PHYSICALITY_TOLERANCE {
            return Err(QpmError::InvalidArgument(format!(
                "unphysical covariance: symplectic eigenvalue {} < 1/2",
                nu[0]
            )));
        }
        Ok(state)
    }

    pub fn mode_count(&self) -> usize {
        self.v.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Ascending symplectic eigenvalues (N values).
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.v)
    }

    /// Covariance of the partially transposed state: p quadratures of the
    /// modes in `subset` change sign.
    pub fn partial_transpose(&self, subset: &[usize]) -> DMatrix<f64> {
        let n = self.mode_count();
        let mut sign = vec![1.0; 2 * n];
        for &j in subset {
            sign[n + j] = -1.0;
        }
        DMatrix::from_fn(2 * n, 2 * n, |i, j| sign[i] * sign[j] * self.v[(i, j)])
    }
}

/// Groups of indices that `coupled(i, j)` links, transitively.
fn linked_groups(n: usize, coupled: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut group = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if group[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut members = vec![start];
        group[start] = id;
        let mut k = 0;
        while k < members.len() {
            let i = members[k];
            for (j, g) in group.iter_mut().enumerate() {
                if *g == usize::MAX && coupled(i, j) {
                    *g = id;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups
}

/// Moduli of the eigenvalues of iΩV, ascending, one per mode. Requires V
/// positive definite.
///
/// Modes with no correlation to the rest are handled on their own, so an
/// uncoupled mode in vacuum gives exactly ½. Each coupled block uses the
/// symmetric form V^{1/2}·ΩVΩᵀ·V^{1/2}, whose eigenvalues are the squared
/// symplectic eigenvalues, each appearing twice.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(v)?;
    let n = v.nrows() / 2;
    let eig = SymmetricEigen::new(v.clone());
    if let Some(bad) = eig.eigenvalues.iter().find(|&&e| e.is_nan() || e <= 0.0) {
        return Err(QpmError::InvalidArgument(format!(
            "covariance is not positive definite (eigenvalue {bad})"
        )));
    }
    let blocks = linked_groups(n, |i, j| {
        v[(i, j)] != 0.0 || v[(i, n + j)] != 0.0 || v[(n + i, j)] != 0.0 || v[(n + i, n + j)] != 0.0
    });
    let mut out = Vec::with_capacity(n);
    for modes in blocks {
        let m = modes.len();
        let quad: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|&i| n + i)).collect();
        let sub = DMatrix::from_fn(2 * m, 2 * m, |a, b| v[(quad[a], quad[b])]);
        if m == 1 {
            let det = sub[(0, 0)] * sub[(1, 1)] - sub[(0, 1)] * sub[(1, 0)];
            out.push(det.sqrt());
            continue;
        }
        let root = symmetric_function(&sub, f64::sqrt);
        let omega = symplectic_form(m);
        let b = &root * &omega * &sub * omega.transpose() * &root;
        let b = (&b + b.transpose()) * 0.5;
        let mut sq: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
        sq.sort_by(f64::total_cmp);
        out.extend(sq.chunks(2).map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt()));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Vacuum evolved under all couplings of G for squeezing parameter r.
/// Uncoupled groups of modes are exponentiated separately, so modes with
/// no couplings stay exactly in vacuum.
pub fn evolve_vacuum(g: &DMatrix<f64>, r: f64) -> Result<CovarianceState> {
    check_symmetric(g)?;
    let n = g.nrows();
    let mut v = DMatrix::identity(2 * n, 2 * n) * VACUUM_VARIANCE;
    if r == 0.0 {
        return Ok(CovarianceState { v });
    }
    for modes in linked_groups(n, |i, j| g[(i, j)] != 0.0) {
        let m = modes.len();
        let scaled = DMatrix::from_fn(m, m, |a, b| 2.0 * r * g[(modes[a], modes[b])]);
        let plus = symmetric_function(&scaled, f64::exp);
        let minus = symmetric_function(&scaled, |x| (-x).exp());
        for a in 0..m {
            for b in 0..m {
                v[(modes[a], modes[b])] = VACUUM_VARIANCE * plus[(a, b)];
                v[(n + modes[a], n + modes[b])] = VACUUM_VARIANCE * minus[(a, b)];
            }
        }
    }
    Ok(CovarianceState { v })
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() || subset.len() >= n {
        return Err(QpmError::InvalidArgument(
            "bipartition must be a nonempty proper subset of the modes".into(),
        ));
    }
    for (i, &j) in subset.iter().enumerate() {
        if j >= n {
            return Err(QpmError::InvalidArgument(format!("mode {j} out of range")));
        }
        if subset[..i].contains(&j) {
            return Err(QpmError::InvalidArgument(format!("mode {j} listed twice")));
        }
    }
    Ok(())
}

/// Smallest symplectic eigenvalue of the partial transpose over `subset`.
/// Below ½ witnesses entanglement across the cut.
pub fn ppt_min_eigenvalue(state: &CovarianceState, subset: &[usize]) -> Result<f64> {
    check_subset(state.mode_count(), subset)?;
    let nu = symplectic_eigenvalues(&state.partial_transpose(subset))?;
    Ok(nu[0])
}

/// All bipartitions of `n` modes, one side of each (the side without the
/// last mode), 2^(n−1) − 1 in total.
pub fn bipartitions(n: usize) -> Vec<Vec<usize>> {
    if n < 2 {
        return Vec::new();
    }
    (1u64..(1u64 << (n - 1)))
        .map(|mask| (0..n - 1).filter(|&i| mask & (1 << i) != 0).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartitionResult {
    pub subset: Vec<usize>,
    pub ppt_min_eigenvalue: f64,
    pub entangled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub graph: ConcurrenceGraph,
    pub squeezing_r: f64,
    pub connected: bool,
    pub bipartitions: Vec<BipartitionResult>,
}

/// Evolve vacuum through `graph` and run the PPT test on every bipartition.
pub fn analyze(graph: &ConcurrenceGraph, r: f64) -> Result<EntanglementReport> {
    let g = adjacency_matrix(graph);
    let state = evolve_vacuum(&g, r)?;
    let bipartitions = bipartitions(graph.mode_count())
        .into_iter()
        .map(|subset| {
            let v = ppt_min_eigenvalue(&state, &subset)?;
            Ok(BipartitionResult {
                subset,
                ppt_min_eigenvalue: v,
                entangled: v < VACUUM_VARIANCE - PHYSICALITY_TOLERANCE,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EntanglementReport {
        graph: graph.clone(),
        squeezing_r: r,
        connected: graph.is_connected(),
        bipartitions,
    })
}
