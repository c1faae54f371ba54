use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{NhgwpError, Result};

/// Generalized Gaussian wavepacket
/// psi(x) = exp((i/hbar) (sum_ij alpha_ij (x-q)_i (x-q)_j + sum_j p_j (x-q)_j + gamma)).
/// All parameters are complex; Im(alpha) must stay positive definite for
/// the state to be normalizable.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketState {
    pub alpha: DMatrix<Complex64>,
    pub q: DVector<Complex64>,
    pub p: DVector<Complex64>,
    pub gamma: Complex64,
    pub t: f64,
}

impl WavepacketState {
    pub fn new(
        alpha: DMatrix<Complex64>,
        q: DVector<Complex64>,
        p: DVector<Complex64>,
        gamma: Complex64,
        t: f64,
    ) -> Result<Self> {
        let d = q.len();
        if alpha.nrows() != d || alpha.ncols() != d {
            return Err(NhgwpError::DimensionMismatch {
                expected: d,
                got: alpha.nrows(),
            });
        }
        if p.len() != d {
            return Err(NhgwpError::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        let state = Self { alpha, q, p, gamma, t };
        state.check_im_alpha_pd()?;
        Ok(state)
    }

    /// 1D convenience constructor.
    pub fn new_1d(alpha: Complex64, q: Complex64, p: Complex64, gamma: Complex64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, alpha),
            DVector::from_element(1, q),
            DVector::from_element(1, p),
            gamma,
            0.0,
        )
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn im_alpha(&self) -> DMatrix<f64> {
        self.alpha.map(|z| z.im)
    }

    /// Im(alpha) positive definite check (Cholesky).
    pub fn check_im_alpha_pd(&self) -> Result<()> {
        let im = self.im_alpha();
        if nalgebra::Cholesky::new(im).is_none() {
            return Err(NhgwpError::NonNormalizable { t: self.t });
        }
        Ok(())
    }

    /// Force exact symmetry of alpha (used after integration steps).
    pub fn symmetrize_alpha(&mut self) {
        let at = self.alpha.transpose();
        self.alpha = (&self.alpha + at) * Complex64::new(0.5, 0.0);
    }

    /// Squared amplitude width per coordinate: sigma2_j = (hbar/2) [(Im alpha)^-1]_jj.
    /// In 1D this is the familiar sigma^2 = hbar / (2 Im alpha).
    pub fn sigma2(&self, hbar: f64) -> Result<DVector<f64>> {
        let im = self.im_alpha();
        let inv = im
            .try_inverse()
            .ok_or(NhgwpError::NonNormalizable { t: self.t })?;
        Ok(DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|j| 0.5 * hbar * inv[(j, j)]),
        ))
    }
}

/// One monomial c * prod_j x_j^powers[j] of a real-coefficient polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Real-coefficient multivariate polynomial potential. Real coefficients
/// make the analytic continuation to complex q exact (no branch cuts).
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    pub dim: usize,
    pub terms: Vec<PolyTerm>,
}

impl PolynomialPotential {
    pub fn new(dim: usize, terms: Vec<PolyTerm>) -> Result<Self> {
        for term in &terms {
            if term.powers.len() != dim {
                return Err(NhgwpError::DimensionMismatch {
                    expected: dim,
                    got: term.powers.len(),
                });
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    /// 1D dense power list: coeffs[k] multiplies x^k.
    pub fn from_coeffs_1d(coeffs: &[f64]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| PolyTerm { coeff: *c, powers: vec![k as u32] })
            .collect();
        Self { dim: 1, terms }
    }

    /// V(x) = (1/2) m omega^2 x^2 (1D).
    pub fn harmonic_1d(mass: f64, omega: f64) -> Self {
        Self::from_coeffs_1d(&[0.0, 0.0, 0.5 * mass * omega * omega])
    }

    /// V(x) = beta x (1D).
    pub fn linear_ramp_1d(beta: f64) -> Self {
        Self::from_coeffs_1d(&[0.0, beta])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    /// Evaluate at a real point (all-real arithmetic).
    pub fn eval_real(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(NhgwpError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut v = 0.0;
        for term in &self.terms {
            let mut m = term.coeff;
            for (j, &pw) in term.powers.iter().enumerate() {
                m *= x[j].powi(pw as i32);
            }
            v += m;
        }
        Ok(v)
    }
}

/// Separable linear imaginary vector potential b_j(x_j) = slope_j x_j + offset_j.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearVectorPotential {
    pub slope: DVector<f64>,
    pub offset: DVector<f64>,
}

impl LinearVectorPotential {
    pub fn new(slope: DVector<f64>, offset: DVector<f64>) -> Result<Self> {
        if slope.len() != offset.len() {
            return Err(NhgwpError::DimensionMismatch {
                expected: slope.len(),
                got: offset.len(),
            });
        }
        Ok(Self { slope, offset })
    }

    pub fn constant_1d(k: f64) -> Self {
        Self {
            slope: DVector::from_element(1, 0.0),
            offset: DVector::from_element(1, k),
        }
    }

    pub fn linear_1d(slope: f64, offset: f64) -> Self {
        Self {
            slope: DVector::from_element(1, slope),
            offset: DVector::from_element(1, offset),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            slope: DVector::zeros(dim),
            offset: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.slope.len()
    }

    pub fn is_zero(&self) -> bool {
        self.slope.iter().all(|s| *s == 0.0) && self.offset.iter().all(|c| *c == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.slope.iter().all(|s| *s == 0.0)
    }
}

/// Full model: H = sum_j (1/2 m_j) (P_j + i b_j(X_j))^2 + V(x).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    pub masses: DVector<f64>,
    pub hbar: f64,
    pub potential: PolynomialPotential,
    pub vecpot: LinearVectorPotential,
}

impl ModelSpec {
    pub fn new(
        masses: DVector<f64>,
        hbar: f64,
        potential: PolynomialPotential,
        vecpot: LinearVectorPotential,
    ) -> Result<Self> {
        let dim = masses.len();
        if potential.dim != dim {
            return Err(NhgwpError::DimensionMismatch { expected: dim, got: potential.dim });
        }
        if vecpot.dim() != dim {
            return Err(NhgwpError::DimensionMismatch { expected: dim, got: vecpot.dim() });
        }
        Ok(Self { dim, masses, hbar, potential, vecpot })
    }

    pub fn new_1d(mass: f64, hbar: f64, potential: PolynomialPotential, vecpot: LinearVectorPotential) -> Self {
        Self::new(DVector::from_element(1, mass), hbar, potential, vecpot).unwrap()
    }
}

/// Local harmonic approximation data of V at (complex) q:
/// value, gradient, and HALF the Hessian, so that
/// V(x) ~ V(q) + grad . (x-q) + (x-q) . half_hessian . (x-q).
/// The half factor is the quadratic-form convention used throughout the
/// width equation of motion; the harmonic fixed point alpha = i m omega / 2
/// only comes out right with it.
pub fn potential_lha(
    potential: &PolynomialPotential,
    q: &DVector<Complex64>,
) -> Result<(Complex64, DVector<Complex64>, DMatrix<Complex64>)> {
    let d = potential.dim;
    if q.len() != d {
        return Err(NhgwpError::DimensionMismatch { expected: d, got: q.len() });
    }

    let zero = Complex64::new(0.0, 0.0);
    let mut value = zero;
    let mut grad = DVector::from_element(d, zero);
    let mut half_hess = DMatrix::from_element(d, d, zero);

    // Per-coordinate powers q_j^0 .. q_j^maxpow, computed once per term.
    for term in &potential.terms {
        let c = Complex64::new(term.coeff, 0.0);

        let monom = |skip: &[usize]| -> Complex64 {
            let mut m = Complex64::new(1.0, 0.0);
            for (j, &pw) in term.powers.iter().enumerate() {
                let drop = skip.iter().filter(|&&s| s == j).count() as u32;
                let pw_eff = pw.saturating_sub(drop);
                m *= q[j].powu(pw_eff);
            }
            m
        };

        value += c * monom(&[]);

        for j in 0..d {
            let nj = term.powers[j];
            if nj == 0 {
                continue;
            }
            grad[j] += c * (nj as f64) * monom(&[j]);

            // Diagonal second derivative: n (n-1) q^(n-2).
            if nj >= 2 {
                half_hess[(j, j)] +=
                    c * (nj as f64) * ((nj - 1) as f64) * 0.5 * monom(&[j, j]);
            }
            // Mixed second derivatives.
            for l in (j + 1)..d {
                let nl = term.powers[l];
                if nl == 0 {
                    continue;
                }
                let m = c * (nj as f64) * (nl as f64) * 0.5 * monom(&[j, l]);
                half_hess[(j, l)] += m;
                half_hess[(l, j)] += m;
            }
        }
    }

    Ok((value, grad, half_hess))
}

/// b and b' at (complex) q. b_j = slope_j q_j + offset_j; b'_j = slope_j
/// is real and constant because b is exactly linear.
pub fn eval_b(
    vecpot: &LinearVectorPotential,
    q: &DVector<Complex64>,
) -> Result<(DVector<Complex64>, DVector<f64>)> {
    let d = vecpot.dim();
    if q.len() != d {
        return Err(NhgwpError::DimensionMismatch { expected: d, got: q.len() });
    }
    let b = DVector::from_iterator(
        d,
        (0..d).map(|j| q[j] * vecpot.slope[j] + vecpot.offset[j]),
    );
    Ok((b, vecpot.slope.clone()))
}
