//! Two-qubit density-matrix algebra for repeater links.
//!
//! States live in the computational basis `|00>, |01>, |10>, |11>` with the
//! left qubit most significant. The four-qubit joint state used during a swap
//! is ordered `A ⊗ B1 ⊗ B2 ⊗ C`, where `B1`/`B2` are the two memories of the
//! swapping node.
//!
//! Every channel in this simulator (depolarizing memory noise, a `|Φ+>`
//! projected swap, the post-purification reset) maps Werner states to Werner
//! states, so [`WernerForm`] is an exact scalar shadow of [`DensityMatrix4`]
//! for the states the engine produces.

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64;

use crate::error::{domain, Result, SimError};

pub type Matrix16 = SMatrix<Complex64, 16, 16>;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_FLOOR: f64 = -1e-10;
const DEGENERATE_TRACE: f64 = 1e-15;

/// A validated 4×4 two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4(Matrix4<Complex64>);

impl DensityMatrix4 {
    /// Validates Hermiticity, unit trace and positivity before wrapping.
    pub fn new(entries: Matrix4<Complex64>) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let diff = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                if diff > HERMITIAN_TOL {
                    return Err(SimError::Config(format!(
                        "density matrix is not Hermitian at ({i},{j}): deviation {diff:e}"
                    )));
                }
            }
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(SimError::Config(format!("density matrix trace is {trace}, expected 1")));
        }
        let min_eig = entries
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_FLOOR {
            return Err(SimError::Config(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self(entries))
    }

    /// Wraps a matrix produced by one of the closed channels below.
    pub(crate) fn from_trusted(entries: Matrix4<Complex64>) -> Self {
        Self(entries)
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity().scale(0.25))
    }

    pub fn entries(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix4) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Werner weight and the matching `|Φ+>` fidelity, `F = (3ω + 1) / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerForm {
    omega: f64,
    fidelity: f64,
}

impl WernerForm {
    pub fn from_omega(omega: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega) {
            return Err(domain("omega", omega, "[0, 1]"));
        }
        Ok(Self::from_omega_unchecked(omega))
    }

    pub fn from_fidelity(fidelity: f64) -> Result<Self> {
        if !(0.25 - 1e-12..=1.0 + 1e-12).contains(&fidelity) {
            return Err(domain("fidelity", fidelity, "[0.25, 1]"));
        }
        let fidelity = fidelity.clamp(0.25, 1.0);
        Ok(Self {
            omega: (4.0 * fidelity - 1.0) / 3.0,
            fidelity,
        })
    }

    fn from_omega_unchecked(omega: f64) -> Self {
        let omega = omega.clamp(0.0, 1.0);
        Self {
            omega,
            fidelity: (3.0 * omega + 1.0) / 4.0,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    /// Scalar depolarizing channel: the Werner weight decays by `e^{-t/T}`.
    pub fn depolarized(self, t_ms: f64, t_depol_ms: f64) -> Result<Self> {
        let lambda = decay_factor(t_ms, t_depol_ms)?;
        Ok(Self::from_omega_unchecked(lambda * self.omega))
    }

    /// Scalar `|Φ+>`-projected swap: Werner weights multiply.
    pub fn swapped_with(self, other: WernerForm) -> Self {
        Self::from_omega_unchecked(self.omega * other.omega)
    }

    pub fn to_matrix(self) -> DensityMatrix4 {
        werner_unchecked(self.omega)
    }
}

/// `|Φ+><Φ+|` with `|Φ+> = (|00> + |11>)/√2`.
pub fn bell_phi_plus() -> DensityMatrix4 {
    let half = Complex64::new(0.5, 0.0);
    let mut m = Matrix4::zeros();
    for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(i, j)] = half;
    }
    DensityMatrix4(m)
}

/// `ω |Φ+><Φ+| + (1 - ω) I/4`.
pub fn werner(omega: f64) -> Result<DensityMatrix4> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(domain("omega", omega, "[0, 1]"));
    }
    Ok(werner_unchecked(omega))
}

fn werner_unchecked(omega: f64) -> DensityMatrix4 {
    mix_with_identity(&bell_phi_plus(), omega)
}

fn mix_with_identity(rho: &DensityMatrix4, lambda: f64) -> DensityMatrix4 {
    let noise = Matrix4::<Complex64>::identity().scale((1.0 - lambda) / 4.0);
    DensityMatrix4(rho.0.scale(lambda) + noise)
}

/// `e^{-t/T}`, with `T = +inf` meaning a noiseless memory.
pub fn decay_factor(t_ms: f64, t_depol_ms: f64) -> Result<f64> {
    if !(t_ms >= 0.0) || t_ms.is_infinite() && t_depol_ms.is_infinite() {
        return Err(domain("t", t_ms, "finite and >= 0"));
    }
    if !(t_depol_ms > 0.0) {
        return Err(domain("t_depol", t_depol_ms, "> 0 (inf allowed)"));
    }
    if t_depol_ms.is_infinite() {
        return Ok(1.0);
    }
    Ok((-t_ms / t_depol_ms).exp())
}

/// Continuous-time depolarization: `ρ(t) = λρ + (1-λ) I/4`, `λ = e^{-t/T}`.
pub fn depolarize(rho: &DensityMatrix4, t_ms: f64, t_depol_ms: f64) -> Result<DensityMatrix4> {
    let lambda = decay_factor(t_ms, t_depol_ms)?;
    if lambda == 1.0 {
        return Ok(rho.clone());
    }
    Ok(mix_with_identity(rho, lambda))
}

/// `<Φ+|ρ|Φ+>`.
pub fn fidelity_phi_plus(rho: &DensityMatrix4) -> f64 {
    let m = &rho.0;
    let overlap = (m[(0, 0)] + m[(0, 3)] + m[(3, 0)] + m[(3, 3)]) * 0.5;
    debug_assert!(overlap.im.abs() <= 1e-12, "fidelity has imaginary part {}", overlap.im);
    overlap.re.clamp(0.0, 1.0)
}

/// Reads off the Werner weight `ω = (4F - 1)/3`, clamped to `[0, 1]`.
pub fn to_werner_form(rho: &DensityMatrix4) -> WernerForm {
    let f = fidelity_phi_plus(rho);
    WernerForm::from_omega_unchecked((4.0 * f - 1.0) / 3.0)
}

/// Result of a projected swap, keeping the pre-normalization trace around.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapOutcome {
    pub state: DensityMatrix4,
    pub projection_trace: f64,
}

/// `I ⊗ |Φ+><Φ+| ⊗ I` on `A ⊗ B1 ⊗ B2 ⊗ C`.
pub fn swap_projector() -> Matrix16 {
    let id2 = Matrix2::<Complex64>::identity();
    id2.kronecker(&bell_phi_plus().0).kronecker(&id2)
}

/// Traces `B1` and `B2` out of a 16×16 operator on `A ⊗ B1 ⊗ B2 ⊗ C`.
pub fn trace_out_middle(joint: &Matrix16) -> Matrix4<Complex64> {
    let mut out = Matrix4::zeros();
    for a in 0..2 {
        for c in 0..2 {
            for a2 in 0..2 {
                for c2 in 0..2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for mid in 0..4 {
                        let row = a * 8 + mid * 2 + c;
                        let col = a2 * 8 + mid * 2 + c2;
                        acc += joint[(row, col)];
                    }
                    out[(a * 2 + c, a2 * 2 + c2)] = acc;
                }
            }
        }
    }
    out
}

/// Entanglement swap of links A–B and B–C into A–C, keeping the `|Φ+>` outcome.
pub fn swap_links_with_trace(rho_ab: &DensityMatrix4, rho_bc: &DensityMatrix4) -> Result<SwapOutcome> {
    let projected = project_and_reduce(&rho_ab.0, &rho_bc.0);
    let trace = projected.trace().re;
    if trace < DEGENERATE_TRACE {
        return Err(SimError::DegenerateState { trace });
    }
    let reduced = projected.unscale(trace);
    // symmetrize away rounding so downstream Hermiticity checks stay tight
    let reduced = (reduced + reduced.adjoint()).scale(0.5);
    Ok(SwapOutcome {
        state: DensityMatrix4::from_trusted(reduced),
        projection_trace: trace,
    })
}

/// `Tr_B1B2[P (ρ_ab ⊗ ρ_bc) P]` with `P` from [`swap_projector`], contracted
/// directly: `½ Σ_{m,m'} ρ_ab[(a,m),(a',m')] ρ_bc[(m,c),(m',c')]`.
pub fn project_and_reduce(rho_ab: &Matrix4<Complex64>, rho_bc: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let mut out = Matrix4::zeros();
    for a in 0..2 {
        for c in 0..2 {
            for a2 in 0..2 {
                for c2 in 0..2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..2 {
                        for m2 in 0..2 {
                            acc += rho_ab[(a * 2 + m, a2 * 2 + m2)] * rho_bc[(m * 2 + c, m2 * 2 + c2)];
                        }
                    }
                    out[(a * 2 + c, a2 * 2 + c2)] = acc * 0.5;
                }
            }
        }
    }
    out
}

pub fn swap_links(rho_ab: &DensityMatrix4, rho_bc: &DensityMatrix4) -> Result<DensityMatrix4> {
    swap_links_with_trace(rho_ab, rho_bc).map(|o| o.state)
}
