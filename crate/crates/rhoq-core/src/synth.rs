//! Seeded synthetic generators with known correlation structure.
//!
//! Every generator is a pure function of its parameters and seed, so outputs
//! reproduce bit-identically; see [`crate::rng`] for the stream contract.

use alloc::vec::Vec;
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("parameter {name} = {value} outside its domain ({constraint})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("length must be at least 1")]
    EmptyLength,
    #[error("split {split} beyond length {len}")]
    SplitBeyondLength { split: usize, len: usize },
}

fn check(ok: bool, name: &'static str, value: f64, constraint: &'static str) -> Result<(), SynthError> {
    if ok {
        Ok(())
    } else {
        Err(SynthError::InvalidParameter {
            name,
            value,
            constraint,
        })
    }
}

fn check_len(len: usize) -> Result<(), SynthError> {
    if len == 0 {
        Err(SynthError::EmptyLength)
    } else {
        Ok(())
    }
}

/// I.i.d. bivariate standard normal pairs with population correlation `rho0`:
/// `y = rho0 * x + sqrt(1 - rho0^2) * z` with independent standard normals
/// x and z. For `rho0 = 1` this makes y equal to x elementwise.
pub fn gaussian_pair(rho0: f64, len: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    check(rho0.is_finite() && rho0.abs() <= 1.0, "rho0", rho0, "|rho0| <= 1")?;
    check_len(len)?;
    let mut rng_x = Rng::substream(seed, 0);
    let mut rng_z = Rng::substream(seed, 1);
    let slope = rho0;
    let noise = libm::sqrt(1.0 - rho0 * rho0);
    let mut x = Vec::with_capacity(len);
    let mut y = Vec::with_capacity(len);
    for _ in 0..len {
        let xv = rng_x.normal();
        let zv = rng_z.normal();
        x.push(xv);
        y.push(slope * xv + noise * zv);
    }
    Ok((x, y))
}

/// Stationary AR(1): `x_t = phi * x_{t-1} + z_t` with the first value drawn
/// from the stationary distribution. `phi = 0` reduces to white noise.
pub fn ar1(phi: f64, len: usize, seed: u64) -> Result<Vec<f64>, SynthError> {
    check(phi.is_finite() && phi.abs() < 1.0, "phi", phi, "|phi| < 1")?;
    check_len(len)?;
    let mut rng = Rng::new(seed);
    let mut x = Vec::with_capacity(len);
    let mut prev = rng.normal() / libm::sqrt(1.0 - phi * phi);
    x.push(prev);
    for _ in 1..len {
        prev = phi * prev + rng.normal();
        x.push(prev);
    }
    Ok(x)
}

/// I.i.d. Student-t draws with `dof` degrees of freedom via the polar
/// transform `t = sqrt(dof * (u^(-2/dof) - 1)) * cos(2 pi v)`, the Student-t
/// analog of the Box-Muller construction (recovers it as dof -> infinity).
pub fn student_t(dof: f64, len: usize, seed: u64) -> Result<Vec<f64>, SynthError> {
    check(dof.is_finite() && dof > 2.0, "dof", dof, "dof > 2")?;
    check_len(len)?;
    let mut rng = Rng::new(seed);
    let mut x = Vec::with_capacity(len);
    for _ in 0..len {
        let u = 1.0 - rng.uniform(); // (0, 1]
        let v = rng.uniform();
        let radius = libm::sqrt(dof * (libm::pow(u, -2.0 / dof) - 1.0));
        x.push(radius * libm::cos(2.0 * core::f64::consts::PI * v));
    }
    Ok(x)
}

/// GARCH(1,1)-style volatility clustering:
/// `sigma2_t = omega + alpha * x_{t-1}^2 + beta * sigma2_{t-1}`,
/// `x_t = sigma_t * z_t`, started at the unconditional variance
/// `omega / (1 - alpha - beta)`.
pub fn garch_like(
    omega: f64,
    alpha: f64,
    beta: f64,
    len: usize,
    seed: u64,
) -> Result<Vec<f64>, SynthError> {
    check(omega.is_finite() && omega > 0.0, "omega", omega, "omega > 0")?;
    check(alpha.is_finite() && alpha >= 0.0, "alpha", alpha, "alpha >= 0")?;
    check(beta.is_finite() && beta >= 0.0, "beta", beta, "beta >= 0")?;
    check(alpha + beta < 1.0, "alpha+beta", alpha + beta, "alpha + beta < 1")?;
    check_len(len)?;
    let mut rng = Rng::new(seed);
    let mut x = Vec::with_capacity(len);
    let mut sigma2 = omega / (1.0 - alpha - beta);
    let mut prev = 0.0f64;
    for _ in 0..len {
        sigma2 = omega + alpha * prev * prev + beta * sigma2;
        prev = libm::sqrt(sigma2) * rng.normal();
        x.push(prev);
    }
    Ok(x)
}

/// Pair that is independent standard normal before `split` and identical
/// (one shared stream) from `split` on.
pub fn two_regime_pair(
    len: usize,
    split: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    check_len(len)?;
    if split > len {
        return Err(SynthError::SplitBeyondLength { split, len });
    }
    let mut rng_x = Rng::substream(seed, 0);
    let mut rng_y = Rng::substream(seed, 1);
    let mut rng_common = Rng::substream(seed, 2);
    let mut x = Vec::with_capacity(len);
    let mut y = Vec::with_capacity(len);
    for i in 0..len {
        if i < split {
            x.push(rng_x.normal());
            y.push(rng_y.normal());
        } else {
            let v = rng_common.normal();
            x.push(v);
            y.push(v);
        }
    }
    Ok((x, y))
}

/// A generator request: kind, parameters, length and seed in one value.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    GaussianPair { rho0: f64, len: usize, seed: u64 },
    Ar1 { phi: f64, len: usize, seed: u64 },
    StudentT { dof: f64, len: usize, seed: u64 },
    GarchLike { omega: f64, alpha: f64, beta: f64, len: usize, seed: u64 },
    TwoRegimePair { len: usize, split: usize, seed: u64 },
}

/// Output of [`GeneratorSpec::generate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Series(Vec<f64>),
    Pair(Vec<f64>, Vec<f64>),
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Generated, SynthError> {
        Ok(match *self {
            GeneratorSpec::GaussianPair { rho0, len, seed } => {
                let (x, y) = gaussian_pair(rho0, len, seed)?;
                Generated::Pair(x, y)
            }
            GeneratorSpec::Ar1 { phi, len, seed } => Generated::Series(ar1(phi, len, seed)?),
            GeneratorSpec::StudentT { dof, len, seed } => {
                Generated::Series(student_t(dof, len, seed)?)
            }
            GeneratorSpec::GarchLike {
                omega,
                alpha,
                beta,
                len,
                seed,
            } => Generated::Series(garch_like(omega, alpha, beta, len, seed)?),
            GeneratorSpec::TwoRegimePair { len, split, seed } => {
                let (x, y) = two_regime_pair(len, split, seed)?;
                Generated::Pair(x, y)
            }
        })
    }
}
