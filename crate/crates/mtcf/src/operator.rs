//! Finite-dimensional operator algebra for the system Hilbert space.
//!
//! Everything here is dense and small (qubits in practice, any finite
//! dimension in principle): commutators, conjugation by the free system
//! evolution, decomposition of a coupling operator into eigenoperators of
//! the system Liouvillian, and expansion over an operator basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerance for merging Bohr frequencies into one eigenoperator component.
const BOHR_MERGE_TOL: f64 = 1e-9;

/// Dense complex square matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<C64>,
}

impl std::fmt::Debug for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Operator dim={}", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format!("{:+.4}{:+.4}i", self[(i, j)].re, self[(i, j)].im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Build from nested rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        let op = Operator { dim, entries };
        if !op.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(op)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Operator {
        Operator::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions must match");
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product `out = self * psi`.
    pub fn apply(&self, psi: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert_eq!(psi.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = ZERO;
            let row = &self.entries[i * n..(i + 1) * n];
            for (a, x) in row.iter().zip(psi.iter()) {
                acc += a * x;
            }
            out[i] = acc;
        }
    }

    pub fn apply_owned(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        self.apply(psi, &mut out);
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Trace inner product `tr(self† rhs)`.
    pub fn inner(&self, rhs: &Operator) -> C64 {
        self.entries
            .iter()
            .zip(rhs.entries.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self[(i, j)])
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Operator::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn sigma_x() -> Operator {
        Operator::from_fn(2, |i, j| if i != j { ONE } else { ZERO })
    }

    pub fn sigma_y() -> Operator {
        let mut m = Operator::zeros(2);
        m[(0, 1)] = -I;
        m[(1, 0)] = I;
        m
    }

    pub fn sigma_z() -> Operator {
        let mut m = Operator::zeros(2);
        m[(0, 0)] = ONE;
        m[(1, 1)] = -ONE;
        m
    }

    /// Qubit lowering operator |−⟩⟨+| in the σ_z eigenbasis: transforms with
    /// phase e^{-iωs} under conjugation by exp(i H_S s) when H_S = (ω/2)σ_z.
    pub fn sigma_12() -> Operator {
        let mut m = Operator::zeros(2);
        m[(1, 0)] = ONE;
        m
    }

    /// Off-diagonal qubit observable [[0, a], [b, 0]].
    pub fn offdiag(a: C64, b: C64) -> Operator {
        let mut m = Operator::zeros(2);
        m[(0, 1)] = a;
        m[(1, 0)] = b;
        m
    }
}

impl std::ops::Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl std::ops::Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim);
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(rhs.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim);
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(rhs.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// XY − YX.
pub fn commutator(x: &Operator, y: &Operator) -> Result<Operator> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(&x.matmul(y) - &y.matmul(x))
}

/// System under study: Hamiltonian, environment coupling operator, the
/// dimensionless coupling scale multiplying every mode coupling, and the
/// initial (unit-norm) system state.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub dim: usize,
    pub h_sys: Operator,
    pub coupling: Operator,
    pub coupling_scale: f64,
    pub psi0: Vec<C64>,
}

impl SystemSpec {
    pub fn new(
        h_sys: Operator,
        coupling: Operator,
        coupling_scale: f64,
        psi0: Vec<C64>,
    ) -> Result<Self> {
        let dim = h_sys.dim();
        let dev = h_sys.hermiticity_deviation();
        if dev > 1e-12 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        if coupling.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: coupling.dim(),
            });
        }
        if psi0.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: psi0.len(),
            });
        }
        let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        if !(coupling_scale.is_finite() && coupling_scale >= 0.0) {
            return Err(Error::config("coupling_scale", "must be finite and >= 0"));
        }
        Ok(SystemSpec {
            dim,
            h_sys,
            coupling,
            coupling_scale,
            psi0,
        })
    }

    /// Qubit with H_S = (ω/2)σ_z.
    pub fn qubit(omega: f64, coupling: Operator, coupling_scale: f64, psi0: Vec<C64>) -> Result<Self> {
        SystemSpec::new(
            Operator::sigma_z().scale(C64::new(omega / 2.0, 0.0)),
            coupling,
            coupling_scale,
            psi0,
        )
    }

    /// Eigendecomposition of H_S: ascending eigenvalues and the unitary whose
    /// columns are the eigenvectors.
    pub fn h_eigenbasis(&self) -> (Vec<f64>, Operator) {
        hermitian_eigen(&self.h_sys)
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
pub fn hermitian_eigen(op: &Operator) -> (Vec<f64>, Operator) {
    let eig = op.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Operator::from_fn(op.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// exp(i H_S s) X exp(−i H_S s), computed in the eigenbasis of H_S.
pub fn free_conjugate(sys: &SystemSpec, x: &Operator, s: f64) -> Operator {
    let (energies, u) = sys.h_eigenbasis();
    let u_dag = u.adjoint();
    let y = u_dag.matmul(x).matmul(&u);
    let rotated = Operator::from_fn(x.dim(), |a, b| {
        y[(a, b)] * (I * (energies[a] - energies[b]) * s).exp()
    });
    u.matmul(&rotated).matmul(&u_dag)
}

/// One eigenoperator: conjugating `operator` by exp(i H_S s) multiplies it by
/// exp(−i Ω s).
#[derive(Clone, Debug)]
pub struct EigenComponent {
    pub frequency: f64,
    pub operator: Operator,
}

/// Decomposition of an operator into eigenoperators of the free system
/// Liouvillian, grouped by Bohr frequency and sorted ascending.
#[derive(Clone, Debug)]
pub struct EigenOperatorDecomposition {
    pub components: Vec<EigenComponent>,
}

impl EigenOperatorDecomposition {
    pub fn reconstruct(&self, dim: usize) -> Operator {
        let mut sum = Operator::zeros(dim);
        for c in &self.components {
            sum = &sum + &c.operator;
        }
        sum
    }
}

/// Split X into components X_Ω with exp(iH_S s) X_Ω exp(−iH_S s) = e^{−iΩs} X_Ω.
///
/// In the eigenbasis of H_S the matrix element (a,b) carries Ω = E_b − E_a;
/// frequencies closer than 1e−9 are merged into one component.
pub fn eigen_decompose(sys: &SystemSpec, x: &Operator) -> EigenOperatorDecomposition {
    let dim = x.dim();
    let (energies, u) = sys.h_eigenbasis();
    let u_dag = u.adjoint();
    let y = u_dag.matmul(x).matmul(&u);

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            pairs.push((energies[b] - energies[a], a, b));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    let drop_tol = 1e-12 * x.frobenius_norm().max(1.0);
    let mut components = Vec::new();
    let mut k = 0;
    while k < pairs.len() {
        let mut group_end = k + 1;
        while group_end < pairs.len() && pairs[group_end].0 - pairs[group_end - 1].0 < BOHR_MERGE_TOL {
            group_end += 1;
        }
        let mut masked = Operator::zeros(dim);
        let mut freq_acc = 0.0;
        for &(w, a, b) in &pairs[k..group_end] {
            masked[(a, b)] = y[(a, b)];
            freq_acc += w;
        }
        if masked.frobenius_norm() > drop_tol {
            let frequency = freq_acc / (group_end - k) as f64;
            components.push(EigenComponent {
                frequency,
                operator: u.matmul(&masked).matmul(&u_dag),
            });
        }
        k = group_end;
    }
    EigenOperatorDecomposition { components }
}

/// Ordered set of dim² operators spanning the dim×dim matrices, with its Gram
/// matrix factorized for expansion.
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<Operator>,
    gram_lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl OperatorBasis {
    pub fn new(elements: Vec<Operator>) -> Result<Self> {
        let dim = elements[0].dim();
        let b = elements.len();
        if b != dim * dim {
            return Err(Error::DimensionMismatch {
                left: dim * dim,
                right: b,
            });
        }
        let gram = DMatrix::from_fn(b, b, |mu, nu| elements[mu].inner(&elements[nu]));
        let gram_lu = gram.lu();
        if gram_lu.determinant().norm() < 1e-12 {
            return Err(Error::SingularGram);
        }
        Ok(OperatorBasis {
            dim,
            elements,
            gram_lu,
        })
    }

    /// Canonical qubit basis (I, σ_x, σ_y, σ_z).
    pub fn qubit() -> Self {
        OperatorBasis::new(vec![
            Operator::identity(2),
            Operator::sigma_x(),
            Operator::sigma_y(),
            Operator::sigma_z(),
        ])
        .expect("canonical qubit basis is non-singular")
    }

    /// Matrix-unit basis E_{ij}, row-major, for any dimension.
    pub fn matrix_units(dim: usize) -> Self {
        let mut elements = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut e = Operator::zeros(dim);
                e[(i, j)] = ONE;
                elements.push(e);
            }
        }
        OperatorBasis::new(elements).expect("matrix units are non-singular")
    }

    /// Canonical basis for the given dimension: Pauli set for qubits, matrix
    /// units otherwise.
    pub fn canonical(dim: usize) -> Self {
        if dim == 2 {
            Self::qubit()
        } else {
            Self::matrix_units(dim)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, mu: usize) -> &Operator {
        &self.elements[mu]
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    /// Coefficients c with X = Σ_ρ c_ρ B_ρ.
    pub fn expand(&self, x: &Operator) -> Result<Vec<C64>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: x.dim(),
            });
        }
        let b = self.elements.len();
        let rhs = nalgebra::DVector::from_fn(b, |mu, _| self.elements[mu].inner(x));
        let sol = self.gram_lu.solve(&rhs).ok_or(Error::SingularGram)?;
        Ok(sol.iter().copied().collect())
    }

    pub fn reconstruct(&self, coeffs: &[C64]) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for (c, e) in coeffs.iter().zip(self.elements.iter()) {
            out = &out + &e.scale(*c);
        }
        out
    }

    /// Structure constants c with B_μ B_ν = Σ_ρ c[μ][ν][ρ] B_ρ, flattened as
    /// c[(μ·b + ν)·b + ρ] for b = dim².
    pub fn product_table(&self) -> Result<Vec<C64>> {
        let b = self.elements.len();
        let mut table = vec![ZERO; b * b * b];
        for mu in 0..b {
            for nu in 0..b {
                let prod = self.elements[mu].matmul(&self.elements[nu]);
                let coeffs = self.expand(&prod)?;
                table[(mu * b + nu) * b..(mu * b + nu) * b + b].copy_from_slice(&coeffs);
            }
        }
        Ok(table)
    }
}
