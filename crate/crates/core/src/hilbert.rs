//! Dense complex linear algebra over finite tensor-product spaces.
//!
//! States and operators are stored as flat `Vec<Complex64>` in the
//! lexicographic basis: for a layout with subsystem dimensions
//! `d_0, d_1, ..., d_{n-1}`, the basis state `|i_0 i_1 ... i_{n-1}>` sits at
//! flat index `sum_k i_k * prod_{j>k} d_j` (the last subsystem varies
//! fastest). Everything is exact dense arithmetic; there is no truncation or
//! sparsity anywhere.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for exactness checks: normalization, projector and
/// Hermiticity tests, probability thresholds. Functions that compare against
/// a tolerance accept it as an explicit parameter so callers can override it.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Hard cap on the total Hilbert-space dimension (desk scale).
pub const DIMENSION_CAP: usize = 1 << 16;

/// An ordered list of subsystem dimensions defining a tensor-product space.
///
/// The empty layout is the one-dimensional scalar space (the identity of the
/// tensor product); every non-empty layout requires each dimension to be at
/// least 2 and the product of all dimensions to stay at or below
/// [`DIMENSION_CAP`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        for &d in &dims {
            if d < 2 {
                return Err(Error::BadSubsystemDim { dim: d });
            }
        }
        let total: u128 = dims.iter().map(|&d| d as u128).product();
        if total > DIMENSION_CAP as u128 {
            return Err(Error::DimensionCap {
                dim: total.min(usize::MAX as u128) as usize,
                cap: DIMENSION_CAP,
            });
        }
        Ok(Self { dims })
    }

    /// The trivial one-dimensional space (empty tensor product).
    pub fn scalar() -> Self {
        Self { dims: Vec::new() }
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn subsystem_count(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Number of flat-index steps between consecutive values of subsystem `k`.
    pub fn stride(&self, k: usize) -> usize {
        self.dims[k + 1..].iter().product()
    }

    /// Flat index of the basis state with the given per-subsystem indices.
    pub fn index_of(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.dims.len() {
            return Err(Error::AmplitudeLength {
                got: indices.len(),
                want: self.dims.len(),
            });
        }
        let mut flat = 0usize;
        for (k, (&i, &d)) in indices.iter().zip(&self.dims).enumerate() {
            if i >= d {
                return Err(Error::BasisIndex { index: i, dim: d });
            }
            flat += i * self.stride(k);
        }
        Ok(flat)
    }

    /// Per-subsystem indices of a flat basis index.
    pub fn indices_of(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        out
    }

    /// Layout of the tensor product `self (x) other`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims)
    }

    fn mismatch(&self, other: &Self) -> Error {
        Error::LayoutMismatch {
            left: self.to_string(),
            right: other.to_string(),
        }
    }
}

impl std::fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.dims.is_empty() {
            return write!(f, "[scalar]");
        }
        write!(f, "[")?;
        for (k, d) in self.dims.iter().enumerate() {
            if k > 0 {
                write!(f, "x")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// A pure state: a vector of complex amplitudes in the lexicographic basis.
///
/// Construction does not force normalization; operations that require a
/// normalized state check it explicitly. Global phase is never fixed —
/// states that differ by a phase compare equal through [`Ket::overlap_sqr`].
#[derive(Debug, Clone)]
pub struct Ket {
    layout: SubsystemLayout,
    amps: Vec<Complex64>,
}

impl Ket {
    pub fn new(layout: SubsystemLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::AmplitudeLength {
                got: amps.len(),
                want: layout.total_dim(),
            });
        }
        Ok(Self { layout, amps })
    }

    /// Like [`Ket::new`] but additionally requires `|<psi|psi> - 1| <= eps`.
    pub fn normalized(layout: SubsystemLayout, amps: Vec<Complex64>, eps: f64) -> Result<Self> {
        let ket = Self::new(layout, amps)?;
        if !ket.is_normalized(eps) {
            return Err(Error::NotNormalized {
                norm_sqr: ket.norm_sqr(),
            });
        }
        Ok(ket)
    }

    /// Real amplitudes, for the many textbook states with no phases.
    pub fn from_real(layout: SubsystemLayout, amps: &[f64]) -> Result<Self> {
        Self::new(layout, amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The basis state `|flat>`.
    pub fn basis_state(layout: SubsystemLayout, flat: usize) -> Result<Self> {
        let n = layout.total_dim();
        if flat >= n {
            return Err(Error::BasisIndex { index: flat, dim: n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[flat] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    /// The basis state with the given per-subsystem indices.
    pub fn basis_state_at(layout: SubsystemLayout, indices: &[usize]) -> Result<Self> {
        let flat = layout.index_of(indices)?;
        Self::basis_state(layout, flat)
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, eps: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= eps
    }

    /// Rescale to unit norm. Fails on (numerically) zero vectors.
    pub fn normalize(&self) -> Result<Ket> {
        let n2 = self.norm_sqr();
        if n2 <= f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm { norm_sqr: n2 });
        }
        Ok(self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Ket {
        Ket {
            layout: self.layout.clone(),
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    /// `|<self|other>|^2` — the phase-insensitive comparison used throughout.
    pub fn overlap_sqr(&self, other: &Ket) -> Result<f64> {
        Ok(inner_product(self, other)?.norm_sqr())
    }

    /// Maximum componentwise deviation from `other` after aligning the global
    /// phase of `other` to this state. Zero-overlap pairs are compared as-is.
    pub fn componentwise_distance_up_to_phase(&self, other: &Ket) -> Result<f64> {
        let ip = inner_product(self, other)?;
        let phase = if ip.norm() > 0.0 {
            ip.conj() / ip.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max))
    }
}

/// `<bra|ket>` with the conjugation on the first argument.
pub fn inner_product(bra: &Ket, ket: &Ket) -> Result<Complex64> {
    if bra.layout != ket.layout {
        return Err(bra.layout.mismatch(&ket.layout));
    }
    Ok(bra
        .amps
        .iter()
        .zip(&ket.amps)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Tensor product `|a> (x) |b>`, with `a`'s subsystems ordered first.
pub fn tensor_kets(a: &Ket, b: &Ket) -> Result<Ket> {
    let layout = a.layout.concat(&b.layout)?;
    let nb = b.layout.total_dim();
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    for (i, &ai) in a.amps.iter().enumerate() {
        for (j, &bj) in b.amps.iter().enumerate() {
            amps[i * nb + j] = ai * bj;
        }
    }
    Ket::new(layout, amps)
}

/// A dense square matrix on the full space of its layout, row-major.
#[derive(Debug, Clone)]
pub struct Operator {
    layout: SubsystemLayout,
    entries: Vec<Complex64>,
}

impl Operator {
    pub fn from_entries(layout: SubsystemLayout, entries: Vec<Complex64>) -> Result<Self> {
        let n = layout.total_dim();
        if entries.len() != n * n {
            return Err(Error::MatrixShape {
                got: entries.len(),
                want: n * n,
                dim: n,
            });
        }
        Ok(Self { layout, entries })
    }

    pub fn from_real_rows(layout: SubsystemLayout, rows: &[&[f64]]) -> Result<Self> {
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_entries(layout, entries)
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { layout, entries }
    }

    pub fn zeros(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout,
            entries: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        if self.layout != other.layout {
            return Err(self.layout.mismatch(&other.layout));
        }
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(Operator {
            layout: self.layout.clone(),
            entries: out,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        if self.layout != other.layout {
            return Err(self.layout.mismatch(&other.layout));
        }
        Ok(Operator {
            layout: self.layout.clone(),
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Operator {
        Operator {
            layout: self.layout.clone(),
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        Operator {
            layout: self.layout.clone(),
            entries,
        }
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.dim();
        (0..n).map(|i| self.entries[i * n + i]).sum()
    }

    /// Entrywise max-modulus norm; the deviation measure used by validators.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, eps: f64) -> bool {
        self.sub(&self.adjoint()).map(|d| d.max_abs() <= eps).unwrap_or(false)
    }

    /// Idempotent and Hermitian within `eps`.
    pub fn is_projector(&self, eps: f64) -> bool {
        if !self.is_hermitian(eps) {
            return false;
        }
        match self.matmul(self).and_then(|sq| sq.sub(self)) {
            Ok(d) => d.max_abs() <= eps,
            Err(_) => false,
        }
    }

    /// `max |[A, B]|` entrywise — zero iff the operators commute.
    pub fn commutator_max_abs(&self, other: &Operator) -> Result<f64> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ab.sub(&ba)?.max_abs())
    }

    /// The Pauli matrices on a single qubit (layout `[2]`).
    pub fn pauli_x() -> Operator {
        let layout = SubsystemLayout::new(vec![2]).expect("qubit layout");
        Operator::from_real_rows(layout, &[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2")
    }

    pub fn pauli_y() -> Operator {
        let layout = SubsystemLayout::new(vec![2]).expect("qubit layout");
        let i = Complex64::new(0.0, 1.0);
        Operator::from_entries(
            layout,
            vec![Complex64::new(0.0, 0.0), -i, i, Complex64::new(0.0, 0.0)],
        )
        .expect("2x2")
    }

    pub fn pauli_z() -> Operator {
        let layout = SubsystemLayout::new(vec![2]).expect("qubit layout");
        Operator::from_real_rows(layout, &[&[1.0, 0.0], &[0.0, -1.0]]).expect("2x2")
    }
}

/// `|k><k|` for a normalized `k` (within [`DEFAULT_EPS`]).
pub fn projector_onto(k: &Ket) -> Result<Operator> {
    if !k.is_normalized(DEFAULT_EPS) {
        return Err(Error::NotNormalized {
            norm_sqr: k.norm_sqr(),
        });
    }
    let n = k.amps.len();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = k.amps[i] * k.amps[j].conj();
        }
    }
    Operator::from_entries(k.layout.clone(), entries)
}

/// Embed a single-subsystem operator into the full space as
/// `I (x) ... (x) op (x) ... (x) I` at position `target`.
pub fn lift_to_subsystem(
    op: &Operator,
    target: usize,
    layout: &SubsystemLayout,
) -> Result<Operator> {
    let count = layout.subsystem_count();
    if target >= count {
        return Err(Error::SubsystemIndex {
            index: target,
            count,
        });
    }
    let d = layout.dims()[target];
    if op.dim() != d {
        return Err(Error::LayoutMismatch {
            left: op.layout.to_string(),
            right: format!("[{d}] (subsystem {target} of {layout})"),
        });
    }
    let n = layout.total_dim();
    let stride = layout.stride(target);
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for row in 0..n {
        let i_t = (row / stride) % d;
        let base = row - i_t * stride;
        for j_t in 0..d {
            let col = base + j_t * stride;
            entries[row * n + col] = op.entry(i_t, j_t);
        }
    }
    Operator::from_entries(layout.clone(), entries)
}

/// `op |k>`.
pub fn apply(op: &Operator, k: &Ket) -> Result<Ket> {
    if op.layout != k.layout {
        return Err(op.layout.mismatch(&k.layout));
    }
    let n = op.dim();
    let amps = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| op.entries[i * n + j] * k.amps[j])
                .sum::<Complex64>()
        })
        .collect();
    Ket::new(k.layout.clone(), amps)
}

/// `<k| op |k>` for a normalized `k`. Real for Hermitian `op`; the full
/// complex value is returned so callers can check the imaginary part.
pub fn expectation(op: &Operator, k: &Ket) -> Result<Complex64> {
    if !k.is_normalized(DEFAULT_EPS) {
        return Err(Error::NotNormalized {
            norm_sqr: k.norm_sqr(),
        });
    }
    inner_product(k, &apply(op, k)?)
}
