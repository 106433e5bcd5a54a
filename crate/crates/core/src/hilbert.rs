//! Truncated joint Hilbert space of one cavity mode and one two-level atom,
//! with the elementary operators living on it.
//!
//! Basis ordering is photon-major and fixed everywhere: joint index
//! `k = 2*n + s` where `n` is the photon number and `s = 0` is the excited
//! atomic state `|+>`, `s = 1` the ground state `|->`. The cavity ladder is
//! truncated to `|0> .. |N-1>`.

use crate::error::{Error, Result};
use crate::linalg::{self, ONE};
use ndarray::prelude::*;
use num_complex::Complex64 as C64;

/// Atomic basis label in the fixed ordering (`Excited` = 0, `Ground` = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomState {
    Excited,
    Ground,
}

impl AtomState {
    pub fn index(self) -> usize {
        match self {
            AtomState::Excited => 0,
            AtomState::Ground => 1,
        }
    }
}

/// Descriptor of the truncated joint space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    fock_dim: usize,
}

impl HilbertSpec {
    /// Build a space descriptor with `fock_dim` retained Fock states.
    pub fn new(fock_dim: usize) -> Result<Self> {
        if fock_dim < 2 {
            return Err(Error::InvalidInput(format!(
                "fock_dim must be >= 2, got {fock_dim}"
            )));
        }
        Ok(HilbertSpec { fock_dim })
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    /// Total joint dimension `D = 2 * fock_dim`.
    pub fn dim(&self) -> usize {
        2 * self.fock_dim
    }

    /// Joint basis index of `|n, s>`.
    pub fn index(&self, n: usize, s: AtomState) -> usize {
        debug_assert!(n < self.fock_dim);
        2 * n + s.index()
    }

    /// Truncation-safety guideline for displacement amplitudes: `|alpha|^2 <= fock_dim / 4`.
    pub fn displacement_bound(&self) -> f64 {
        self.fock_dim as f64 / 4.0
    }

    /// Whether a displacement amplitude respects the truncation-safety guideline.
    pub fn displacement_safe(&self, alpha: C64) -> bool {
        alpha.norm_sqr() <= self.displacement_bound()
    }
}

/// Dense operator on the joint space, tagged with its spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    spec: HilbertSpec,
    matrix: Array2<C64>,
}

/// Pure state on the joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    spec: HilbertSpec,
    amplitudes: Array1<C64>,
}

fn check_specs(a: HilbertSpec, b: HilbertSpec) -> Result<()> {
    if a != b {
        return Err(Error::SpecMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

impl Operator {
    pub fn from_matrix(spec: HilbertSpec, matrix: Array2<C64>) -> Result<Self> {
        let d = spec.dim();
        if matrix.dim() != (d, d) {
            return Err(Error::SpecMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        Ok(Operator { spec, matrix })
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            spec: self.spec,
            matrix: linalg::adjoint(&self.matrix),
        }
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        check_specs(self.spec, other.spec)?;
        Ok(Operator {
            spec: self.spec,
            matrix: self.matrix.dot(&other.matrix),
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        check_specs(self.spec, other.spec)?;
        Ok(Operator {
            spec: self.spec,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        check_specs(self.spec, other.spec)?;
        Ok(Operator {
            spec: self.spec,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, z: C64) -> Operator {
        Operator {
            spec: self.spec,
            matrix: self.matrix.mapv(|x| x * z),
        }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        check_specs(self.spec, other.spec)?;
        Ok(Operator {
            spec: self.spec,
            matrix: &self.matrix.dot(&other.matrix) - &other.matrix.dot(&self.matrix),
        })
    }

    /// `<psi| A |psi>`.
    pub fn expectation(&self, state: &Ket) -> Result<C64> {
        check_specs(self.spec, state.spec)?;
        let av = self.matrix.dot(&state.amplitudes);
        Ok(state
            .amplitudes
            .iter()
            .zip(av.iter())
            .map(|(c, x)| c.conj() * x)
            .sum())
    }

    /// Apply to a pure state.
    pub fn apply(&self, state: &Ket) -> Result<Ket> {
        check_specs(self.spec, state.spec)?;
        Ok(Ket {
            spec: self.spec,
            amplitudes: self.matrix.dot(&state.amplitudes),
        })
    }

    pub fn hermiticity_residue(&self) -> f64 {
        linalg::hermiticity_residue(&self.matrix)
    }
}

impl Ket {
    pub fn from_amplitudes(spec: HilbertSpec, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != spec.dim() {
            return Err(Error::SpecMismatch {
                expected: spec.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(Ket { spec, amplitudes })
    }

    /// Bare basis state `|n, s>`.
    pub fn basis(spec: HilbertSpec, n: usize, s: AtomState) -> Result<Self> {
        if n >= spec.fock_dim() {
            return Err(Error::InvalidInput(format!(
                "photon number {n} outside truncation {}",
                spec.fock_dim()
            )));
        }
        let mut amplitudes = Array1::<C64>::zeros(spec.dim());
        amplitudes[spec.index(n, s)] = ONE;
        Ok(Ket { spec, amplitudes })
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(&self) -> Ket {
        let n = self.norm();
        Ket {
            spec: self.spec,
            amplitudes: self.amplitudes.mapv(|z| z / n),
        }
    }

    /// `<self | other>`.
    pub fn dot(&self, other: &Ket) -> Result<C64> {
        check_specs(self.spec, other.spec)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Identity on the joint space.
pub fn identity(spec: HilbertSpec) -> Operator {
    Operator {
        spec,
        matrix: Array2::<C64>::eye(spec.dim()),
    }
}

/// Annihilation operator `a (x) I_atom`: `<n-1, s| a |n, s> = sqrt(n)`.
pub fn annihilation(spec: HilbertSpec) -> Operator {
    crate::linalg::ensure_blas_single_thread();
    let n = spec.fock_dim();
    let mut af = Array2::<C64>::zeros((n, n));
    for k in 1..n {
        af[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    Operator {
        spec,
        matrix: linalg::kron(&af, &Array2::<C64>::eye(2)),
    }
}

/// Creation operator `a^dag (x) I_atom`.
pub fn creation(spec: HilbertSpec) -> Operator {
    annihilation(spec).adjoint()
}

/// Photon-number operator `a^dag a (x) I_atom`.
pub fn number(spec: HilbertSpec) -> Operator {
    let n = spec.fock_dim();
    let mut nf = Array2::<C64>::zeros((n, n));
    for k in 0..n {
        nf[[k, k]] = C64::new(k as f64, 0.0);
    }
    Operator {
        spec,
        matrix: linalg::kron(&nf, &Array2::<C64>::eye(2)),
    }
}

/// Atomic pseudospin operators `(sigma_-, sigma_+, sigma_z)` on the joint space.
///
/// `sigma_- |n,+> = |n,->`, `sigma_+ = sigma_-^dag`, `sigma_z = [sigma_+, sigma_-]`.
pub fn atomic_operators(spec: HilbertSpec) -> (Operator, Operator, Operator) {
    crate::linalg::ensure_blas_single_thread();
    let n = spec.fock_dim();
    let mut sm2 = Array2::<C64>::zeros((2, 2));
    sm2[[1, 0]] = ONE; // |-><+|
    let eye_f = Array2::<C64>::eye(n);
    let sm = Operator {
        spec,
        matrix: linalg::kron(&eye_f, &sm2),
    };
    let sp = sm.adjoint();
    let sz = sp.commutator(&sm).expect("same spec");
    (sm, sp, sz)
}

/// Displacement operator `D(alpha) = exp(alpha a^dag - alpha^* a) (x) I_atom`.
///
/// Computed as the matrix exponential of the truncated generator; unitary up
/// to truncation error. Callers should keep `|alpha|^2` within
/// [`HilbertSpec::displacement_bound`]; [`HilbertSpec::displacement_safe`]
/// reports whether a given amplitude does.
pub fn displacement(spec: HilbertSpec, alpha: C64) -> Result<Operator> {
    let n = spec.fock_dim();
    let mut gen = Array2::<C64>::zeros((n, n));
    for k in 1..n {
        let r = C64::new((k as f64).sqrt(), 0.0);
        gen[[k, k - 1]] = alpha * r; // alpha a^dag
        gen[[k - 1, k]] = -alpha.conj() * r; // -alpha^* a
    }
    let df = linalg::expm(&gen)?;
    Ok(Operator {
        spec,
        matrix: linalg::kron(&df, &Array2::<C64>::eye(2)),
    })
}
