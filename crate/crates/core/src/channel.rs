//! Channel draws, zero-forcing precoding and transmit-energy bookkeeping.
//!
//! With stacked channel `H` (`K·n_r × n_t`) and precoder `P` (`n_t × K·n_r`),
//! the transmitter sends `x = P s` and user `k` observes its slice of
//! `y = H x + n`. Under ZF `H P = I`, so `y^k = √E_k U(q^k) b^k + n_k`.
//!
//! The average transmit energy is `E_s γ` with `γ = Σ_m ε_m g_m^T q̄^m`, where
//! `g_m` holds the squared column norms of user `m`'s precoder block; for a
//! total budget `E_T` each user gets `E_k = E_T ε_k / γ`.

use nalgebra::{DMatrix, DMatrixView};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GpsmError, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Default lower bound on the reciprocal condition number of `H H^H`.
pub const DEFAULT_RCOND_THRESHOLD: f64 = 1e-12;

/// Stacked downlink channel `H = [H_1; H_2; ...; H_K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: CMatrix,
    users: usize,
    n_r: usize,
}

impl ChannelRealization {
    pub fn new(h: CMatrix, users: usize, n_r: usize) -> Result<Self> {
        if users == 0 || n_r == 0 || h.nrows() != users * n_r {
            return Err(GpsmError::InvalidArgument(format!(
                "channel has {} rows, expected K·n_r = {}",
                h.nrows(),
                users * n_r
            )));
        }
        if h.ncols() < h.nrows() {
            return Err(GpsmError::InvalidArgument(format!(
                "need n_t >= K·n_r, got n_t={} and K·n_r={}",
                h.ncols(),
                h.nrows()
            )));
        }
        Ok(Self { h, users, n_r })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    /// `H_k`, the `n_r × n_t` block of user `k`.
    pub fn user_block(&self, k: usize) -> DMatrixView<'_, Complex64> {
        self.h.rows(k * self.n_r, self.n_r)
    }
}

/// One sample of `CN(0, variance)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

/// I.i.d. `CN(0, 1)` channel for `k` users with `n_r` antennas each.
pub fn draw_channel<R: Rng + ?Sized>(
    k: usize,
    n_r: usize,
    n_t: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if k == 0 || n_r == 0 || n_t < k * n_r {
        return Err(GpsmError::InvalidArgument(format!(
            "need K >= 1, n_r >= 1 and n_t >= K·n_r, got K={k}, n_r={n_r}, n_t={n_t}"
        )));
    }
    // Row-major fill keeps the draw order independent of storage layout.
    let rows = k * n_r;
    let mut h = CMatrix::zeros(rows, n_t);
    for i in 0..rows {
        for j in 0..n_t {
            h[(i, j)] = complex_gaussian(rng, 1.0);
        }
    }
    ChannelRealization::new(h, k, n_r)
}

/// Reciprocal condition number of `H H^H` (ratio of extreme eigenvalues).
pub fn gram_rcond(h: &ChannelRealization) -> f64 {
    let gram = &h.h * h.h.adjoint();
    let eig = gram.symmetric_eigenvalues();
    let max = eig.max();
    let min = eig.min();
    if max <= 0.0 {
        0.0
    } else {
        (min / max).max(0.0)
    }
}

/// A ZF precoder together with the Cholesky factor it was built from.
#[derive(Debug, Clone)]
pub struct ZeroForcing {
    /// `P = H^H (H H^H)^{-1}`.
    pub p: CMatrix,
    /// `d((H H^H)^{-1})`, read off the explicit Gram inverse.
    pub gram_inverse_diagonal: Vec<f64>,
    pub rcond: f64,
}

/// ZF precoder with the default conditioning threshold.
pub fn zf_precoder(h: &ChannelRealization) -> Result<CMatrix> {
    Ok(zero_forcing(h, DEFAULT_RCOND_THRESHOLD)?.p)
}

/// ZF precoder through a Cholesky factorization of `H H^H`.
///
/// Rejects channels whose Gram matrix has reciprocal condition number below
/// `rcond_threshold`.
pub fn zero_forcing(h: &ChannelRealization, rcond_threshold: f64) -> Result<ZeroForcing> {
    let rcond = gram_rcond(h);
    if !(rcond >= rcond_threshold) {
        return Err(GpsmError::NearSingularChannel { rcond });
    }
    let gram = &h.h * h.h.adjoint();
    let chol = gram
        .cholesky()
        .ok_or(GpsmError::NearSingularChannel { rcond })?;
    // G X = H gives X = G^{-1} H, and P = H^H G^{-1} = X^H since G is Hermitian.
    let x = chol.solve(&h.h);
    let p = x.adjoint();
    let gram_inverse_diagonal = chol.inverse().diagonal().iter().map(|z| z.re).collect();
    Ok(ZeroForcing {
        p,
        gram_inverse_diagonal,
        rcond,
    })
}

/// Squared column norms of each user's precoder block, `g_m = d(P^m^H P^m)`.
pub fn column_energies(p: &CMatrix, k: usize, n_r: usize) -> Result<Vec<Vec<f64>>> {
    if p.ncols() != k * n_r {
        return Err(GpsmError::DimensionMismatch {
            what: "precoder columns",
            expected: k * n_r,
            got: p.ncols(),
        });
    }
    Ok((0..k)
        .map(|m| {
            (0..n_r)
                .map(|i| p.column(m * n_r + i).norm_squared())
                .collect()
        })
        .collect())
}

/// Checks that the per-user energy fractions are positive with mean one.
pub fn validate_fractions(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(GpsmError::InvalidArgument(
            "energy fractions must be positive".into(),
        ));
    }
    let mean = eps.iter().sum::<f64>() / eps.len() as f64;
    if (mean - 1.0).abs() > 1e-9 {
        return Err(GpsmError::InvalidArgument(format!(
            "energy fractions must average to 1, got mean {mean}"
        )));
    }
    Ok(())
}

/// `γ = Σ_m ε_m g_m^T q̄^m`.
pub fn gamma<G, Q>(g: &[G], qbar: &[Q], eps: &[f64]) -> Result<f64>
where
    G: AsRef<[f64]>,
    Q: AsRef<[f64]>,
{
    if qbar.len() != g.len() || eps.len() != g.len() {
        return Err(GpsmError::DimensionMismatch {
            what: "per-user inputs to gamma",
            expected: g.len(),
            got: if qbar.len() != g.len() { qbar.len() } else { eps.len() },
        });
    }
    let mut total = 0.0;
    for ((g_m, q_m), e_m) in g.iter().zip(qbar).zip(eps) {
        let (g_m, q_m) = (g_m.as_ref(), q_m.as_ref());
        if g_m.len() != q_m.len() {
            return Err(GpsmError::DimensionMismatch {
                what: "mean pattern",
                expected: g_m.len(),
                got: q_m.len(),
            });
        }
        total += e_m * g_m.iter().zip(q_m).map(|(a, b)| a * b).sum::<f64>();
    }
    if !(total > 0.0) {
        return Err(GpsmError::InvalidArgument(format!(
            "gamma must be positive, got {total}"
        )));
    }
    Ok(total)
}

/// `E_k = E_T ε_k / γ`.
pub fn user_energy(e_t: f64, eps_k: f64, gamma: f64) -> Result<f64> {
    if !(e_t > 0.0 && eps_k > 0.0 && gamma > 0.0) {
        return Err(GpsmError::InvalidArgument(format!(
            "energies must be positive (E_T={e_t}, eps={eps_k}, gamma={gamma})"
        )));
    }
    Ok(e_t * eps_k / gamma)
}

/// Precoder with its energy bookkeeping for one choice of pattern sets.
#[derive(Debug, Clone)]
pub struct PrecoderBundle {
    pub p: CMatrix,
    pub g: Vec<Vec<f64>>,
    pub gamma: f64,
    pub e_t: f64,
    pub eps: Vec<f64>,
    pub e_user: Vec<f64>,
}

impl PrecoderBundle {
    /// Computes `γ` and per-user energies for the given mean patterns.
    pub fn new<Q: AsRef<[f64]>>(
        p: CMatrix,
        n_r: usize,
        qbar: &[Q],
        eps: &[f64],
        e_t: f64,
    ) -> Result<Self> {
        validate_fractions(eps)?;
        let g = column_energies(&p, eps.len(), n_r)?;
        let gamma = gamma(&g, qbar, eps)?;
        let e_user = eps
            .iter()
            .map(|&e| user_energy(e_t, e, gamma))
            .collect::<Result<_>>()?;
        Ok(Self {
            p,
            g,
            gamma,
            e_t,
            eps: eps.to_vec(),
            e_user,
        })
    }

    /// Average symbol energy `E_s = (1/K) Σ E_k`.
    pub fn e_s(&self) -> f64 {
        self.e_user.iter().sum::<f64>() / self.e_user.len() as f64
    }
}

/// `x = P s`.
pub fn transmit(p: &CMatrix, s: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut x = vec![Complex64::new(0.0, 0.0); p.nrows()];
    transmit_into(p, s, &mut x)?;
    Ok(x)
}

/// `x = P s` into a caller-provided buffer.
pub fn transmit_into(p: &CMatrix, s: &[Complex64], x: &mut [Complex64]) -> Result<()> {
    if s.len() != p.ncols() {
        return Err(GpsmError::DimensionMismatch {
            what: "stacked symbol vector",
            expected: p.ncols(),
            got: s.len(),
        });
    }
    if x.len() != p.nrows() {
        return Err(GpsmError::DimensionMismatch {
            what: "transmit buffer",
            expected: p.nrows(),
            got: x.len(),
        });
    }
    matvec(p, s, x);
    Ok(())
}

fn matvec(a: &CMatrix, v: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for (j, &vj) in v.iter().enumerate() {
        if vj == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, &a_ij) in out.iter_mut().zip(a.column(j).iter()) {
            *o += a_ij * vj;
        }
    }
}

/// Additive white Gaussian noise, `CN(0, σ²)` per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    sigma2: f64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(GpsmError::InvalidArgument(format!(
                "noise variance must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    /// The noise-free limit; [`propagate`] then returns `H x` exactly.
    pub fn noiseless() -> Self {
        Self { sigma2: 0.0 }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// `y = H x + n`.
pub fn propagate<R: Rng + ?Sized>(
    h: &ChannelRealization,
    x: &[Complex64],
    noise: NoiseSpec,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let mut y = vec![Complex64::new(0.0, 0.0); h.h.nrows()];
    propagate_into(h, x, noise, rng, &mut y)?;
    Ok(y)
}

/// `y = H x + n` into a caller-provided buffer.
pub fn propagate_into<R: Rng + ?Sized>(
    h: &ChannelRealization,
    x: &[Complex64],
    noise: NoiseSpec,
    rng: &mut R,
    y: &mut [Complex64],
) -> Result<()> {
    if x.len() != h.n_t() {
        return Err(GpsmError::DimensionMismatch {
            what: "transmit vector",
            expected: h.n_t(),
            got: x.len(),
        });
    }
    if y.len() != h.h.nrows() {
        return Err(GpsmError::DimensionMismatch {
            what: "receive buffer",
            expected: h.h.nrows(),
            got: y.len(),
        });
    }
    matvec(&h.h, x, y);
    if noise.sigma2 > 0.0 {
        for z in y.iter_mut() {
            *z += complex_gaussian(rng, noise.sigma2);
        }
    }
    Ok(())
}
