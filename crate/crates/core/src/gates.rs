//! Gate matrix catalog.
//!
//! Matrices are row-major `dim × dim` arrays of `Complex64`. When a gate is
//! applied to a list of qubits (see [`crate::statevector::Statevector::apply_gate`]),
//! the first listed qubit is the least-significant bit of the matrix index.
//! Under that convention `CNOT` applied to `[control, target]` flips `target`
//! when `control` is set, and `CSWAP` applied to `[control, a, b]` swaps `a`
//! and `b` when `control` is set. The controlled rotations keep their
//! textbook block layout, so their control is the *second* listed qubit.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, PartialEq)]
pub struct GateMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl GateMatrix {
    /// Builds a matrix from row-major entries. `dim` must be a power of two
    /// and `entries.len()` must equal `dim * dim`.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!("gate dimension {dim} is not a power of two")));
        }
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} gate, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Self { dim, entries }
    }

    fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        Self {
            dim: N,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    fn diagonal(diag: &[Complex64]) -> Self {
        let dim = diag.len();
        let mut m = Self::identity(dim);
        for (i, d) in diag.iter().enumerate() {
            m.entries[i * dim + i] = *d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits the gate acts on.
    pub fn arity(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Self { dim: d, entries }
    }

    pub fn matmul(&self, rhs: &GateMatrix) -> Result<GateMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.dim, self.dim, rhs.dim, rhs.dim
            )));
        }
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        Ok(GateMatrix { dim: d, entries })
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &GateMatrix) -> GateMatrix {
        let (a, b) = (self.dim, rhs.dim);
        let d = a * b;
        let mut entries = vec![ZERO; d * d];
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self.entries[r1 * a + c1];
                for r2 in 0..b {
                    for c2 in 0..b {
                        entries[(r1 * b + r2) * d + c1 * b + c2] = x * rhs.entries[r2 * b + c2];
                    }
                }
            }
        }
        GateMatrix { dim: d, entries }
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for GateMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GateMatrix {}x{} [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self.get(r, c);
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Z,
    RX,
    RY,
    RZ,
    CNOT,
    CRX,
    CRY,
    CRZ,
    RXX,
    RYY,
    RZZ,
    CSWAP,
}

impl GateKind {
    pub const ALL: [GateKind; 14] = [
        GateKind::H,
        GateKind::X,
        GateKind::Z,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::CNOT,
        GateKind::CRX,
        GateKind::CRY,
        GateKind::CRZ,
        GateKind::RXX,
        GateKind::RYY,
        GateKind::RZZ,
        GateKind::CSWAP,
    ];

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::RX
                | GateKind::RY
                | GateKind::RZ
                | GateKind::CRX
                | GateKind::CRY
                | GateKind::CRZ
                | GateKind::RXX
                | GateKind::RYY
                | GateKind::RZZ
        )
    }
}

impl std::str::FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| format!("{k:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown gate kind {s:?}")))
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {x}")))
    }
}

/// General single-qubit rotation by `theta` about the equatorial axis at
/// azimuth `phi`. `phi = 0` gives `RX(theta)`, `phi = π/2` gives `RY(theta)`.
pub fn single_rotation(theta: f64, phi: f64) -> Result<GateMatrix> {
    check_finite("theta", theta)?;
    check_finite("phi", phi)?;
    let (s, c) = (theta / 2.0).sin_cos();
    let c = Complex64::new(c, 0.0);
    let upper = -I * Complex64::from_polar(1.0, -phi) * s;
    let lower = -I * Complex64::from_polar(1.0, phi) * s;
    Ok(GateMatrix::from_rows([[c, upper], [lower, c]]))
}

/// Looks up a catalog gate. `theta` must be `Some` exactly when the kind is
/// parameterized.
pub fn named_gate(kind: GateKind, theta: Option<f64>) -> Result<GateMatrix> {
    let theta = match (kind.is_parameterized(), theta) {
        (true, Some(t)) => {
            check_finite("theta", t)?;
            t
        }
        (true, None) => return Err(Error::invalid(format!("{kind:?} requires an angle"))),
        (false, Some(_)) => return Err(Error::invalid(format!("{kind:?} takes no angle"))),
        (false, None) => 0.0,
    };
    let (s, c) = (theta / 2.0).sin_cos();
    let (cs, ss) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
    let neg_phase = Complex64::from_polar(1.0, -theta / 2.0);
    let pos_phase = Complex64::from_polar(1.0, theta / 2.0);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);

    let m = match kind {
        GateKind::H => GateMatrix::from_rows([[h, h], [h, -h]]),
        GateKind::X => GateMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]]),
        GateKind::Z => GateMatrix::diagonal(&[ONE, -ONE]),
        GateKind::RX => GateMatrix::from_rows([[cs, -I * ss], [-I * ss, cs]]),
        GateKind::RY => GateMatrix::from_rows([[cs, -ss], [ss, cs]]),
        GateKind::RZ => GateMatrix::diagonal(&[neg_phase, pos_phase]),
        GateKind::CNOT => GateMatrix::from_rows([
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ZERO, ZERO, ONE],
            [ZERO, ZERO, ONE, ZERO],
            [ZERO, ONE, ZERO, ZERO],
        ]),
        GateKind::CRX => GateMatrix::from_rows([
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, cs, -I * ss],
            [ZERO, ZERO, -I * ss, cs],
        ]),
        GateKind::CRY => GateMatrix::from_rows([
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, cs, -ss],
            [ZERO, ZERO, ss, cs],
        ]),
        GateKind::CRZ => GateMatrix::diagonal(&[ONE, ONE, neg_phase, pos_phase]),
        GateKind::RXX => GateMatrix::from_rows([
            [cs, ZERO, ZERO, -I * ss],
            [ZERO, cs, -I * ss, ZERO],
            [ZERO, -I * ss, cs, ZERO],
            [-I * ss, ZERO, ZERO, cs],
        ]),
        GateKind::RYY => GateMatrix::from_rows([
            [cs, ZERO, ZERO, I * ss],
            [ZERO, cs, -I * ss, ZERO],
            [ZERO, -I * ss, cs, ZERO],
            [I * ss, ZERO, ZERO, cs],
        ]),
        GateKind::RZZ => GateMatrix::diagonal(&[neg_phase, pos_phase, pos_phase, neg_phase]),
        GateKind::CSWAP => {
            let mut m = GateMatrix::identity(8);
            for (a, b) in [(3, 5), (5, 3)] {
                m.entries[a * 8 + a] = ZERO;
                m.entries[a * 8 + b] = ONE;
            }
            m
        }
    };
    Ok(m)
}

/// True iff every entry of `g†g - I` has modulus at most `tol`.
pub fn is_unitary(g: &GateMatrix, tol: f64) -> bool {
    let Ok(product) = g.dagger().matmul(g) else {
        return false;
    };
    product.max_abs_diff(&GateMatrix::identity(g.dim)) <= tol
}
