//! The complex side: density operators, transcription of real states, charts,
//! channels, reverse transcription, POVM information measures, entropic
//! uncertainty bounds, effects, and bipartite entropies.
//!
//! Eigendecompositions follow a single deterministic convention so that
//! canonical charts are reproducible despite the gauge freedom: eigenvalues
//! sorted descending, degenerate eigenspaces re-orthonormalized by pivoted
//! Gram-Schmidt on their canonical-basis projections, and the first
//! significant component of every eigenvector made real positive. Eigenvalues
//! below `1e-10` do not count towards the rank; values in `(-1e-9, 0)` are
//! clamped to zero and the spectrum is renormalized to unit sum.
//!
//! All matrices are dense; dimensions are capped at 256.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::boolean::{Covector, Register};
use crate::error::{Error, Result};
use crate::lp::EPS_ZERO;
use crate::registers::{purify, BipartiteSplit, Side};
use crate::state::{shannon_entropy_bits, validate_distribution, QuantumStateReal, Selection};

pub const EPS_HERMITIAN: f64 = 1e-9;
pub const EPS_EIG: f64 = 1e-10;
const EPS_DEGENERATE: f64 = 1e-8;
const MAX_DIM: usize = 256;

type CMatrix = DMatrix<Complex64>;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

fn hermitian_residual(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn max_modulus(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigendecomposition of a Hermitian matrix under the crate's deterministic
/// convention. Returns descending eigenvalues and the matching orthonormal
/// columns.
fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    let sym = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        sym.eigenvalues[j]
            .partial_cmp(&sym.eigenvalues[i])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&i| sym.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (out, &i) in order.iter().enumerate() {
        vectors.set_column(out, &sym.eigenvectors.column(i));
    }
    // deterministic orthonormalization inside each degenerate group
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (values[start] - values[end]).abs() <= EPS_DEGENERATE {
            end += 1;
        }
        if end - start > 1 {
            let group = vectors.columns(start, end - start).into_owned();
            let fixed = deterministic_span_basis(&group);
            for k in 0..end - start {
                vectors.set_column(start + k, &fixed.column(k));
            }
        } else {
            let col = phase_fixed(&vectors.column(start).into_owned());
            vectors.set_column(start, &col);
        }
        start = end;
    }
    (values, vectors)
}

/// Pivoted Gram-Schmidt over the canonical-basis projections of a subspace.
fn deterministic_span_basis(span: &CMatrix) -> CMatrix {
    let d = span.nrows();
    let g = span.ncols();
    // candidates: P e_i = span * (row i of span)^dagger
    let mut candidates: Vec<nalgebra::DVector<Complex64>> = (0..d)
        .map(|i| {
            let row = span.row(i).adjoint();
            span * row
        })
        .collect();
    let mut out = CMatrix::zeros(d, g);
    let mut chosen = 0;
    while chosen < g {
        let (best, norm) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, 0.0), |(bi, bn), (i, n)| {
                if n > bn + 1e-14 {
                    (i, n)
                } else {
                    (bi, bn)
                }
            });
        debug_assert!(norm > 1e-12, "degenerate span");
        let v = phase_fixed(&candidates[best].unscale(norm));
        out.set_column(chosen, &v);
        for c in &mut candidates {
            let overlap = v.dotc(c);
            *c -= &v * overlap;
        }
        chosen += 1;
    }
    out
}

/// Multiplies by a unit phase so the first significant entry is real positive.
fn phase_fixed(v: &nalgebra::DVector<Complex64>) -> nalgebra::DVector<Complex64> {
    for x in v.iter() {
        if x.norm() > 1e-8 {
            let phase = x.conj() / x.norm();
            return v * phase;
        }
    }
    v.clone()
}

/// A positive Hermitian unit-trace operator with its spectral data cached at
/// construction; immutable afterwards.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    spectrum: Vec<f64>,
    eigenbasis: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || d != matrix.ncols() || d > MAX_DIM {
            return Err(Error::InvalidDensityOperator(format!(
                "shape {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let res = hermitian_residual(&matrix);
        if res > EPS_HERMITIAN {
            return Err(Error::NotHermitian(res));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvalidDensityOperator(format!("trace {tr}")));
        }
        let adj = matrix.adjoint();
        let matrix = (matrix + adj).unscale(2.0).unscale(tr.re);
        let (mut spectrum, eigenbasis) = hermitian_eigen(&matrix);
        for lambda in &mut spectrum {
            if *lambda < -EPS_HERMITIAN {
                return Err(Error::InvalidDensityOperator(format!(
                    "negative eigenvalue {lambda}"
                )));
            }
            *lambda = lambda.max(0.0);
        }
        let total: f64 = spectrum.iter().sum();
        for lambda in &mut spectrum {
            *lambda /= total;
        }
        Ok(DensityOperator {
            matrix,
            spectrum,
            eigenbasis,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues in descending order, clamped and normalized.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Orthonormal eigenvectors as columns, matching [`Self::spectrum`].
    pub fn eigenbasis(&self) -> &CMatrix {
        &self.eigenbasis
    }

    pub fn rank(&self) -> usize {
        self.spectrum.iter().filter(|&&l| l > EPS_EIG).count()
    }

    pub fn is_pure(&self) -> bool {
        self.rank() == 1
    }

    /// Diagonal in the reference basis: the working distribution of the chart.
    pub fn diagonal_distribution(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|c| c.re.max(0.0)).collect()
    }

    /// `-sum lambda log2 lambda` over the significant spectrum, in bits.
    pub fn von_neumann_entropy(&self) -> f64 {
        self.spectrum
            .iter()
            .filter(|&&l| l > EPS_EIG)
            .map(|&l| -l * l.log2())
            .sum()
    }
}

/// Entry phases (and optionally an ancilla slot permutation) applied when a
/// real state is transcribed. The natural gauge keeps every amplitude real
/// nonnegative.
#[derive(Debug, Clone)]
pub enum Gauge {
    Natural,
    Phases {
        /// One unit phase per purified entry, `d * d_b` slots, A-major.
        phases: Vec<Complex64>,
        /// Optional permutation of the ancilla slots (which basis vector of
        /// the ancilla each simplex vertex is paired with).
        ancilla_permutation: Option<Vec<usize>>,
    },
}

impl Gauge {
    fn phase(&self, index: usize, expected_len: usize) -> Result<Complex64> {
        match self {
            Gauge::Natural => Ok(Complex64::new(1.0, 0.0)),
            Gauge::Phases { phases, .. } => {
                if phases.len() != expected_len {
                    return Err(Error::InvalidGauge(format!(
                        "expected {expected_len} phases, got {}",
                        phases.len()
                    )));
                }
                let p = phases[index];
                if (p.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidGauge(format!("|phase| = {}", p.norm())));
                }
                Ok(p)
            }
        }
    }

    fn permutation(&self, r: usize) -> Result<Vec<usize>> {
        let perm = match self {
            Gauge::Phases {
                ancilla_permutation: Some(p),
                ..
            } => p.clone(),
            _ => (0..r).collect(),
        };
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&i| i >= r || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidGauge("invalid ancilla permutation".into()));
        }
        Ok(perm)
    }
}

/// A basis of the Hilbert space: one choice of variable set, i.e. a viewpoint.
#[derive(Debug, Clone)]
pub struct Chart {
    unitary: CMatrix,
    label: String,
}

impl Chart {
    pub fn new(unitary: CMatrix, label: impl Into<String>) -> Result<Self> {
        let d = unitary.nrows();
        if d != unitary.ncols() {
            return Err(Error::Dimension {
                expected: d,
                actual: unitary.ncols(),
            });
        }
        let res = max_modulus(&(unitary.adjoint() * &unitary - identity(d)));
        if res > 1e-9 {
            return Err(Error::NotUnitary(res));
        }
        Ok(Chart {
            unitary,
            label: label.into(),
        })
    }

    pub fn identity(d: usize) -> Self {
        Chart {
            unitary: identity(d),
            label: "identity".into(),
        }
    }

    /// Basis vectors as columns, expressed in the reference basis.
    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// The chart reached by applying `other` after this chart.
    pub fn compose(&self, other: &Chart, label: impl Into<String>) -> Chart {
        Chart {
            unitary: &self.unitary * &other.unitary,
            label: label.into(),
        }
    }

    /// Conjugates an operator into this chart: `U^dagger M U`.
    pub fn to_chart(&self, m: &CMatrix) -> CMatrix {
        self.unitary.adjoint() * m * &self.unitary
    }

    /// The von Neumann measurement of the chart: projectors onto its columns.
    pub fn von_neumann_povm(&self) -> HilbertPovm {
        let d = self.dim();
        let elements = (0..d)
            .map(|j| {
                let col = self.unitary.column(j).into_owned();
                let mut p = CMatrix::zeros(d, d);
                for i in 0..d {
                    for k in 0..d {
                        p[(i, k)] = col[i] * col[k].conj();
                    }
                }
                p
            })
            .collect();
        HilbertPovm { elements }
    }
}

/// A Hermitian operator acting on the register's Hilbert space.
#[derive(Debug, Clone)]
pub struct HermitianObservable {
    matrix: CMatrix,
}

impl HermitianObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let res = hermitian_residual(&matrix);
        if res > EPS_HERMITIAN {
            return Err(Error::NotHermitian(res));
        }
        Ok(HermitianObservable { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Descending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }
}

/// Transcribes a covector into the diagonal operator with the same entries.
/// Gauge independent.
pub fn diagonal_observable(q: &Covector) -> HermitianObservable {
    let d = q.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, &x) in q.entries().iter().enumerate() {
        m[(i, i)] = Complex64::new(x, 0.0);
    }
    HermitianObservable { matrix: m }
}

/// Rank-1 projector onto the amplitude vector with `|amplitude|^2 = w`.
pub fn transcribe_pure(w: &[f64], gauge: &Gauge) -> Result<DensityOperator> {
    let w = validate_distribution(w)?;
    let d = w.len();
    let mut amp = nalgebra::DVector::from_element(d, czero());
    for i in 0..d {
        amp[i] = Complex64::new(w[i].sqrt(), 0.0) * gauge.phase(i, d)?;
    }
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = amp[i] * amp[j].conj();
        }
    }
    DensityOperator::new(m)
}

/// Transcribes a mixed state: purify over a minimal ancilla (dimension `r`),
/// phase the amplitudes per the gauge, and trace the ancilla back out. In the
/// natural gauge this is `sum_i mu_i |sqrt(w_i)><sqrt(w_i)|`.
pub fn transcribe_mixed(state: &QuantumStateReal, gauge: &Gauge) -> Result<DensityOperator> {
    let d = state.working().len();
    let r = state.rank();
    let perm = gauge.permutation(r)?;
    let w_c = purify(state, r)?;
    // apply the ancilla permutation to the purified slots
    let mut amp = nalgebra::DVector::from_element(d * r, czero());
    for a in 0..d {
        for i in 0..r {
            let value = w_c[a * r + i];
            let slot = a * r + perm[i];
            amp[slot] = Complex64::new(value.sqrt(), 0.0) * gauge.phase(slot, d * r)?;
        }
    }
    // partial trace over the ancilla of |c><c|
    let mut m = CMatrix::zeros(d, d);
    for a1 in 0..d {
        for a2 in 0..d {
            let mut s = czero();
            for b in 0..r {
                s += amp[a1 * r + b] * amp[a2 * r + b].conj();
            }
            m[(a1, a2)] = s;
        }
    }
    DensityOperator::new(m)
}

/// Born rule `<Q> = Tr(rho Q)`. The imaginary residue must vanish.
pub fn born_expectation(rho: &DensityOperator, obs: &HermitianObservable) -> Result<f64> {
    if obs.dim() != rho.dim() {
        return Err(Error::Dimension {
            expected: rho.dim(),
            actual: obs.dim(),
        });
    }
    let value = trace(&(rho.matrix() * obs.matrix()));
    assert!(
        value.im.abs() <= 1e-9,
        "imaginary residue {} in a Born expectation",
        value.im
    );
    Ok(value.re)
}

/// Applies a Kraus map `rho -> sum_g M_g rho M_g^dagger` after checking the
/// completeness relation at tolerance `1e-8`.
pub fn apply_channel(rho: &DensityOperator, kraus: &[CMatrix]) -> Result<DensityOperator> {
    let d = rho.dim();
    let mut completeness = CMatrix::zeros(d, d);
    for m in kraus {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                actual: m.nrows(),
            });
        }
        completeness += m.adjoint() * m;
    }
    let res = max_modulus(&(completeness - identity(d)));
    if res > 1e-8 {
        return Err(Error::IncompleteKraus(res));
    }
    let mut out = CMatrix::zeros(d, d);
    for m in kraus {
        out += m * rho.matrix() * m.adjoint();
    }
    DensityOperator::new(out)
}

/// Shorthand for a unitary channel.
pub fn apply_unitary(rho: &DensityOperator, chart: &Chart) -> Result<DensityOperator> {
    apply_channel(rho, std::slice::from_ref(chart.unitary()))
}

/// Result of viewing a density operator through a chart.
#[derive(Debug)]
pub enum ReverseTranscription {
    Regular(QuantumStateReal),
    /// The eigenvector intensity vectors span less than the operator rank;
    /// the chart carries no consistent real-space system.
    Singular { span_rank: usize, rank: usize },
}

impl ReverseTranscription {
    pub fn regular(self) -> Option<QuantumStateReal> {
        match self {
            ReverseTranscription::Regular(s) => Some(s),
            ReverseTranscription::Singular { .. } => None,
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, ReverseTranscription::Singular { .. })
    }
}

/// Expresses `rho` in the chart basis and rebuilds the real-space state: the
/// working distribution is the diagonal, the simplex comes from the span of
/// the eigenvector intensities `v_i = |e_i|^2`. Singularity is a value, not an
/// error.
pub fn reverse_transcribe(rho: &DensityOperator, chart: &Chart) -> Result<ReverseTranscription> {
    let d = rho.dim();
    if chart.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            actual: chart.dim(),
        });
    }
    let n = d.trailing_zeros() as usize;
    if 1 << n != d {
        return Err(Error::InvalidDensityOperator(format!(
            "dimension {d} is not a power of two"
        )));
    }
    let register = Register::new(n)?;
    let in_chart = DensityOperator::new(chart.to_chart(rho.matrix()))?;
    let r = in_chart.rank();
    let working = validate_distribution(&in_chart.diagonal_distribution())?;
    let intensities: Vec<Vec<f64>> = (0..r)
        .map(|i| {
            in_chart
                .eigenbasis()
                .column(i)
                .iter()
                .map(|c| c.norm_sqr())
                .collect()
        })
        .collect();
    let vmat = DMatrix::from_fn(r, d, |i, j| intensities[i][j]);
    let svd = vmat.svd(false, false);
    let smax = svd.singular_values.max();
    let span_rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count();
    if span_rank < r {
        return Ok(ReverseTranscription::Singular { span_rank, rank: r });
    }
    let system = crate::state::system_from_span(&intensities, register);
    let polytope = system.enumerate_vertices()?;
    let simplex = polytope.caratheodory(&working)?;
    let state = QuantumStateReal::assemble(working, simplex, system, Selection::Explicit)?;
    Ok(ReverseTranscription::Regular(state))
}

/// The chart whose basis diagonalizes `rho`: its eigenbasis under the crate's
/// deterministic ordering and phase convention.
pub fn canonical_chart(rho: &DensityOperator) -> Chart {
    Chart {
        unitary: rho.eigenbasis().clone(),
        label: "canonical".into(),
    }
}

/// `max |<w1|w2>|` over the two bases; between `1/sqrt(d)` and 1.
pub fn chart_overlap(c1: &Chart, c2: &Chart) -> Result<f64> {
    if c1.dim() != c2.dim() {
        return Err(Error::Dimension {
            expected: c1.dim(),
            actual: c2.dim(),
        });
    }
    Ok(max_modulus(&(c1.unitary().adjoint() * c2.unitary())))
}

/// A resolution of the identity by positive Hermitian operators.
#[derive(Debug, Clone)]
pub struct HilbertPovm {
    elements: Vec<CMatrix>,
}

impl HilbertPovm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let d = elements[0].nrows();
        let mut sum = CMatrix::zeros(d, d);
        for q in &elements {
            if q.nrows() != d || q.ncols() != d {
                return Err(Error::Dimension {
                    expected: d,
                    actual: q.nrows(),
                });
            }
            let res = hermitian_residual(q);
            if res > EPS_HERMITIAN {
                return Err(Error::NotHermitian(res));
            }
            let (values, _) = hermitian_eigen(q);
            if let Some(&min) = values.last() {
                if min < -1e-9 {
                    return Err(Error::InvalidPovm(format!("negative eigenvalue {min}")));
                }
            }
            sum += q;
        }
        let res = max_modulus(&(sum - identity(d)));
        if res > 1e-8 {
            return Err(Error::InvalidPovm(format!(
                "elements sum to the identity only within {res:.3e}"
            )));
        }
        Ok(HilbertPovm { elements })
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Outcome distribution under the Born rule.
    pub fn outcomes(&self, rho: &DensityOperator) -> Vec<f64> {
        self.elements
            .iter()
            .map(|q| trace(&(rho.matrix() * q)).re.max(0.0))
            .collect()
    }
}

/// `Tr(Q1 Q2) = Tr(Q1) Tr(Q2) / d` for every pair, at tolerance `1e-8`:
/// measuring with one POVM while the state lives in the span of the other is
/// indistinguishable from measuring the maximally mixed state.
pub fn povm_independent(p1: &HilbertPovm, p2: &HilbertPovm) -> bool {
    let d = p1.dim() as f64;
    p1.elements.iter().all(|q1| {
        let t1 = trace(q1).re;
        p2.elements.iter().all(|q2| {
            let t2 = trace(q2).re;
            let joint = trace(&(q1 * q2)).re;
            (joint - t1 * t2 / d).abs() <= 1e-8
        })
    })
}

/// Builds a two-element POVM `{Q, 1 - Q}` independent of the given one, by
/// picking a traceless Hermitian direction orthogonal to the POVM's own
/// traceless components. Fails when the POVM is informationally complete.
pub fn independent_complement(povm: &HilbertPovm) -> Result<HilbertPovm> {
    let d = povm.dim();
    let eye = identity(d);
    // orthonormalized traceless components of the POVM
    let mut span: Vec<CMatrix> = Vec::new();
    for q in &povm.elements {
        let tr = trace(q).re;
        if tr <= EPS_ZERO {
            continue;
        }
        let mut e = q.unscale(tr) - eye.unscale(d as f64);
        for s in &span {
            let overlap = trace(&(s.adjoint() * &e));
            e -= s * overlap;
        }
        let norm = trace(&(e.adjoint() * &e)).re.sqrt();
        if norm > 1e-10 {
            span.push(e.unscale(norm));
        }
    }
    // canonical traceless Hermitian generators; first with a residual wins
    let mut candidates: Vec<CMatrix> = Vec::new();
    for k in 0..d - 1 {
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        m[(k + 1, k + 1)] = Complex64::new(-1.0, 0.0);
        candidates.push(m);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut s = CMatrix::zeros(d, d);
            s[(i, j)] = Complex64::new(1.0, 0.0);
            s[(j, i)] = Complex64::new(1.0, 0.0);
            candidates.push(s);
            let mut a = CMatrix::zeros(d, d);
            a[(i, j)] = Complex64::new(0.0, 1.0);
            a[(j, i)] = Complex64::new(0.0, -1.0);
            candidates.push(a);
        }
    }
    for candidate in candidates {
        let mut e = candidate;
        for s in &span {
            let overlap = trace(&(s.adjoint() * &e));
            e -= s * overlap;
        }
        let norm = trace(&(e.adjoint() * &e)).re.sqrt();
        if norm > 1e-8 {
            let e = e.unscale(norm);
            let (values, _) = hermitian_eigen(&e);
            let extreme = values
                .iter()
                .map(|v| v.abs())
                .fold(0.0f64, f64::max)
                .max(1e-12);
            let q = eye.unscale(2.0) + e.scale(0.25 / extreme);
            let rest = &eye - &q;
            return HilbertPovm::new(vec![q, rest]);
        }
    }
    Err(Error::InvalidPovm(
        "POVM is informationally complete; no independent direction".into(),
    ))
}

/// Information gain and entropy of a POVM on a state, both in bits.
///
/// The gain is the relative entropy of the outcome distribution against the
/// maximally mixed reference `p0(g) = Tr(Q_g)/d`, i.e. `N + sum p log2(p/q)`;
/// the entropy is `N - gain` and can never drop below the von Neumann entropy.
pub fn povm_entropy(rho: &DensityOperator, povm: &HilbertPovm) -> Result<(f64, f64)> {
    if povm.dim() != rho.dim() {
        return Err(Error::Dimension {
            expected: rho.dim(),
            actual: povm.dim(),
        });
    }
    let d = rho.dim() as f64;
    let n = d.log2();
    let p = povm.outcomes(rho);
    let mut gain = n;
    for (pk, q) in p.iter().zip(povm.elements()) {
        let qk = trace(q).re;
        if *pk > 1e-300 {
            gain += pk * (pk / qk).log2();
        }
    }
    let entropy = n - gain;
    assert!(
        entropy >= rho.von_neumann_entropy() - 1e-9,
        "POVM entropy {entropy} below the state entropy {}",
        rho.von_neumann_entropy()
    );
    Ok((gain, entropy))
}

/// Chart entropies of a pair of charts with the two uncertainty bounds.
#[derive(Debug, Clone)]
pub struct EntropicBounds {
    pub h1: f64,
    pub h2: f64,
    /// `log2(1/overlap^2)`.
    pub maassen_uffink_bound: f64,
    /// `log2(1/overlap^2) + S(rho)`.
    pub frank_lieb_bound: f64,
    pub satisfied: bool,
}

/// Evaluates both entropic uncertainty bounds at slack `1e-9`. Chart entropy
/// is the Shannon entropy of the diagonal of `rho` in the chart.
pub fn entropic_bounds(rho: &DensityOperator, c1: &Chart, c2: &Chart) -> Result<EntropicBounds> {
    let h1 = chart_entropy(rho, c1)?;
    let h2 = chart_entropy(rho, c2)?;
    let delta = chart_overlap(c1, c2)?;
    let mu = (1.0 / (delta * delta)).log2();
    let fl = mu + rho.von_neumann_entropy();
    let satisfied = h1 + h2 >= mu - 1e-9 && h1 + h2 >= fl - 1e-9;
    Ok(EntropicBounds {
        h1,
        h2,
        maassen_uffink_bound: mu,
        frank_lieb_bound: fl,
        satisfied,
    })
}

/// Shannon entropy of the diagonal of `rho` in the given chart, in bits.
pub fn chart_entropy(rho: &DensityOperator, chart: &Chart) -> Result<f64> {
    if chart.dim() != rho.dim() {
        return Err(Error::Dimension {
            expected: rho.dim(),
            actual: chart.dim(),
        });
    }
    let in_chart = chart.to_chart(rho.matrix());
    let diag: Vec<f64> = in_chart.diagonal().iter().map(|c| c.re.max(0.0)).collect();
    Ok(shannon_entropy_bits(&diag))
}

/// Probability of an effect `0 <= Q <= 1`: its Born expectation, in `[0, 1]`.
pub fn effect_probability(rho: &DensityOperator, effect: &HermitianObservable) -> Result<f64> {
    let values = effect.eigenvalues();
    if let Some(&max) = values.first() {
        if max > 1.0 + 1e-9 {
            return Err(Error::InvalidEffect(max));
        }
    }
    if let Some(&min) = values.last() {
        if min < -1e-9 {
            return Err(Error::InvalidEffect(min));
        }
    }
    let p = born_expectation(rho, effect)?;
    Ok(p.clamp(0.0, 1.0))
}

/// The distribution `h_w = q_w w_w / <q w>` induced inside an effect in its
/// proper chart. The effect must be diagonal in the chart and have nonzero
/// expectation.
pub fn induced_distribution(
    rho: &DensityOperator,
    effect: &HermitianObservable,
    chart: &Chart,
) -> Result<Vec<f64>> {
    let d = rho.dim();
    if effect.dim() != d || chart.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            actual: effect.dim().min(chart.dim()),
        });
    }
    let q_chart = chart.to_chart(effect.matrix());
    let mut offdiag = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                offdiag = offdiag.max(q_chart[(i, j)].norm());
            }
        }
    }
    if offdiag > 1e-9 {
        return Err(Error::NotDiagonalInChart(offdiag));
    }
    let q: Vec<f64> = q_chart.diagonal().iter().map(|c| c.re).collect();
    let rho_chart = chart.to_chart(rho.matrix());
    let w: Vec<f64> = rho_chart.diagonal().iter().map(|c| c.re.max(0.0)).collect();
    let total: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
    if total <= EPS_ZERO {
        return Err(Error::ZeroExpectation);
    }
    Ok(q.iter()
        .zip(&w)
        .map(|(a, b)| (a * b / total).max(0.0))
        .collect())
}

/// Partial trace over one factor of a bipartite operator (A-major indexing).
pub fn partial_trace(m: &CMatrix, split: &BipartiteSplit, traced_out: Side) -> Result<CMatrix> {
    let (da, db) = (split.dim_a(), split.dim_b());
    if m.nrows() != da * db {
        return Err(Error::Dimension {
            expected: da * db,
            actual: m.nrows(),
        });
    }
    match traced_out {
        Side::B => {
            let mut out = CMatrix::zeros(da, da);
            for i1 in 0..da {
                for i2 in 0..da {
                    let mut s = czero();
                    for b in 0..db {
                        s += m[(i1 * db + b, i2 * db + b)];
                    }
                    out[(i1, i2)] = s;
                }
            }
            Ok(out)
        }
        Side::A => {
            let mut out = CMatrix::zeros(db, db);
            for j1 in 0..db {
                for j2 in 0..db {
                    let mut s = czero();
                    for a in 0..da {
                        s += m[(a * db + j1, a * db + j2)];
                    }
                    out[(j1, j2)] = s;
                }
            }
            Ok(out)
        }
    }
}

/// Reduced state on the kept side.
pub fn reduced_state(
    rho_c: &DensityOperator,
    split: &BipartiteSplit,
    keep: Side,
) -> Result<DensityOperator> {
    let traced = match keep {
        Side::A => Side::B,
        Side::B => Side::A,
    };
    DensityOperator::new(partial_trace(rho_c.matrix(), split, traced)?)
}

/// Quantum relative entropy `S(rho || sigma)` in bits, computed on the support
/// of `sigma`. Returns infinity when `rho` has weight outside that support.
pub fn quantum_relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    let mut cross = 0.0; // Tr(rho log2 sigma) over the support
    let mut covered = 0.0;
    for (k, &s) in sigma.spectrum().iter().enumerate() {
        if s > EPS_EIG {
            let f = sigma.eigenbasis().column(k);
            let weight = (f.adjoint() * rho.matrix() * f)[(0, 0)].re.max(0.0);
            covered += weight;
            cross += weight * s.log2();
        }
    }
    if covered < 1.0 - 1e-9 {
        return Ok(f64::INFINITY);
    }
    Ok((-rho.von_neumann_entropy() - cross).max(0.0))
}

/// `S(rho_a | rho_b) = S(rho_c) - S(rho_b)` in bits. Negative for entangled
/// pure states; reported as computed.
pub fn conditional_entropy(rho_c: &DensityOperator, split: &BipartiteSplit) -> Result<f64> {
    let rho_b = reduced_state(rho_c, split, Side::B)?;
    Ok(rho_c.von_neumann_entropy() - rho_b.von_neumann_entropy())
}

/// Relative entropy of the joint state against the product of its own
/// marginals, in bits; always nonnegative.
pub fn entanglement_entropy(rho_c: &DensityOperator, split: &BipartiteSplit) -> Result<f64> {
    let rho_a = reduced_state(rho_c, split, Side::A)?;
    let rho_b = reduced_state(rho_c, split, Side::B)?;
    let product = DensityOperator::new(rho_a.matrix().kronecker(rho_b.matrix()))?;
    quantum_relative_entropy(rho_c, &product)
}

/// Conditional entropy of A after a measurement on B:
/// `sum_g p(g) S(rho_a^g)` with `rho_a^g = Tr_b(rho_c (1 x Q_g)) / p(g)`.
pub fn conditional_entropy_after_measurement(
    rho_c: &DensityOperator,
    split: &BipartiteSplit,
    povm_b: &HilbertPovm,
) -> Result<f64> {
    let da = split.dim_a();
    if povm_b.dim() != split.dim_b() {
        return Err(Error::Dimension {
            expected: split.dim_b(),
            actual: povm_b.dim(),
        });
    }
    let eye_a = identity(da);
    let mut total = 0.0;
    for q in povm_b.elements() {
        let lifted = eye_a.kronecker(q);
        let unnormalized = partial_trace(&(rho_c.matrix() * lifted), split, Side::B)?;
        let p = trace(&unnormalized).re.max(0.0);
        if p > EPS_ZERO {
            let conditional = DensityOperator::new(unnormalized.unscale(p))?;
            total += p * conditional.von_neumann_entropy();
        }
    }
    Ok(total)
}

/// Discord of A given B over a finite candidate family of B-measurements:
/// `max_g [S(rho_a | POVM_b) - S(rho_a | rho_b)]`.
pub fn quantum_discord(
    rho_c: &DensityOperator,
    split: &BipartiteSplit,
    povm_family_b: &[HilbertPovm],
) -> Result<f64> {
    if povm_family_b.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let baseline = conditional_entropy(rho_c, split)?;
    let mut best = f64::NEG_INFINITY;
    for povm in povm_family_b {
        let measured = conditional_entropy_after_measurement(rho_c, split, povm)?;
        best = best.max(measured - baseline);
    }
    Ok(best)
}

/// The default discord search family: the von Neumann measurements of the
/// unbiased cluster centered on the canonical chart of `rho_b`.
pub fn default_discord_family(rho_b: &DensityOperator) -> Result<Vec<HilbertPovm>> {
    let d = rho_b.dim();
    let n = d.trailing_zeros() as usize;
    if 1 << n != d {
        return Err(Error::InvalidDensityOperator(format!(
            "dimension {d} is not a power of two"
        )));
    }
    let canon = canonical_chart(rho_b);
    let cluster = crate::mub::mub_cluster(n)?;
    Ok(cluster
        .iter()
        .map(|c| {
            canon
                .compose(c, format!("canonical*{}", c.label()))
                .von_neumann_povm()
        })
        .collect())
}
