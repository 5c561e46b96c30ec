//! The boundary value problem
//!
//! ```text
//! Phi'' = 2 lambda x^(-1-gamma) 1{x >= eps} Phi,   Phi(0) = 1,
//! ```
//!
//! with `Phi` convex, nonincreasing and nonnegative. `Phi` is affine on
//! `[0, eps]`, and `exp(Phi'(0+) / 2)` is the Laplace transform of
//! `lambda int_eps^inf L^y_{tau(1)} y^(-1-gamma) dy`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::field::{power_weight_integral, sample_field_nodes, FieldGrid};
use crate::ode::{dopri5, Control, Tolerances};
use crate::replicate::Replicator;
use crate::rng::RngStream;
use crate::special::{bessel_i, bessel_k, bessel_k_deriv};
use crate::stats::MomentEstimate;

pub mod family {
    pub const LAPLACE_FIELD: u32 = 0x40;
}

/// Bisection stops when the bracket on `Phi'(eps)` is this narrow.
pub const BRACKET_TOL: f64 = 1e-10;
/// The integration stops where `int_x^inf 2 lambda y^(-1-gamma) dy` falls below this.
pub const TAIL_MASS: f64 = 1e-10;
const PROFILE_POINTS: usize = 400;

#[derive(Clone, Debug, PartialEq)]
pub struct SturmLiouvilleSolution {
    pub lambda: f64,
    pub epsilon: f64,
    pub gamma_exp: f64,
    pub phi_prime_at_zero: f64,
    /// Nodes of the profile, starting at `x = 0`.
    pub profile_x: Vec<f64>,
    pub profile: Vec<f64>,
}

impl SturmLiouvilleSolution {
    /// `Phi(x)` by linear interpolation on the profile.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let xs = &self.profile_x;
        if !(x >= 0.0 && x <= *xs.last()?) {
            return None;
        }
        let i = xs.partition_point(|&v| v < x);
        if xs[i] == x {
            return Some(self.profile[i]);
        }
        let (x0, x1, y0, y1) = (xs[i - 1], xs[i], self.profile[i - 1], self.profile[i]);
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// `exp(Phi'(0+) / 2)`.
    pub fn laplace_transform(&self) -> f64 {
        (0.5 * self.phi_prime_at_zero).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fate {
    /// `Phi` reached 0: the slope was too steep.
    Hits,
    /// `Phi` turned upwards, or would at infinity: too shallow.
    Rises,
}

struct Problem {
    lambda: f64,
    epsilon: f64,
    gamma: f64,
    u_end: f64,
}

impl Problem {
    fn rhs(&self, u: f64, y: &[f64; 2]) -> [f64; 2] {
        let x = u.exp();
        [x * y[1], 2.0 * self.lambda * (-self.gamma * u).exp() * y[0]]
    }

    fn tol() -> Tolerances {
        Tolerances { rel: 1e-12, abs: 1e-15, max_steps: 200_000 }
    }

    /// Integrates from `eps` with `Phi'(eps) = s` and classifies the run.
    fn shoot(&self, s: f64) -> Result<Fate> {
        let u0 = self.epsilon.ln();
        let y0 = [1.0 + self.epsilon * s, s];
        if y0[0] <= 0.0 {
            return Ok(Fate::Hits);
        }
        let mut fate = None;
        let (u, y) = dopri5(
            |u, y| self.rhs(u, y),
            u0,
            y0,
            self.u_end,
            Self::tol(),
            |_, y| {
                if y[0] < 0.0 {
                    fate = Some(Fate::Hits);
                    Control::Stop
                } else if y[1] > 0.0 {
                    fate = Some(Fate::Rises);
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        )?;
        Ok(fate.unwrap_or_else(|| {
            // slope still to be gained beyond the end of the range
            let x = u.exp();
            let gain = 2.0 * self.lambda * x.powf(-self.gamma) / self.gamma * y[0];
            if y[1] + gain > 0.0 {
                Fate::Rises
            } else {
                Fate::Hits
            }
        }))
    }

    /// `(Phi, Phi')` at the log-spaced points `us` for slope `s`; stops at the
    /// first point where `Phi` is no longer positive or `Phi'` turns positive.
    fn trajectory(&self, s: f64, us: &[f64]) -> Result<Vec<[f64; 2]>> {
        let mut out = Vec::with_capacity(us.len());
        let mut y = [1.0 + self.epsilon * s, s];
        out.push(y);
        for w in us.windows(2) {
            let (_, y1) = dopri5(|u, y| self.rhs(u, y), w[0], y, w[1], Self::tol(), |_, _| Control::Continue)?;
            y = y1;
            if !(y[0] > 0.0) || y[1] > 0.0 {
                break;
            }
            out.push(y);
        }
        Ok(out)
    }
}

/// Solves the problem by shooting on `Phi'(eps)`.
///
/// The bracket starts at `[-1/eps, 0]`: the lower end sends `Phi` to 0 at
/// `eps`, the upper one leaves it constant and the potential bends it up.
/// Each trial slope is integrated in `log x` until `Phi` hits 0 or turns
/// upwards, or until the remaining potential mass is below [`TAIL_MASS`].
pub fn solve_sturm_liouville(lambda: f64, epsilon: f64, gamma: f64) -> Result<SturmLiouvilleSolution> {
    ensure(lambda > 0.0 && lambda.is_finite(), "lambda", "must be finite and > 0")?;
    ensure(epsilon > 0.0 && epsilon.is_finite(), "epsilon", "must be finite and > 0")?;
    ensure(gamma > 0.0 && gamma.is_finite(), "gamma", "must be finite and > 0")?;
    let x_big = (2.0 * lambda / (gamma * TAIL_MASS)).powf(1.0 / gamma).max(10.0 * epsilon);
    let p = Problem { lambda, epsilon, gamma, u_end: x_big.ln() };
    let (mut lo, mut hi) = (-1.0 / epsilon, 0.0);
    let mut trace: Vec<(f64, f64)> = Vec::new();
    if p.shoot(hi)? != Fate::Rises || p.shoot(lo)? != Fate::Hits {
        return Err(Error::Convergence(format!("shooting bracket [{lo}, {hi}] does not straddle the solution")));
    }
    while hi - lo > BRACKET_TOL {
        trace.push((lo, hi));
        if trace.len() > 200 {
            let tail: String = trace.iter().rev().take(5).map(|(a, b)| format!(" [{a:.3e}, {b:.3e}]")).collect();
            return Err(Error::Convergence(format!("shooting did not narrow; last brackets:{tail}")));
        }
        let mid = 0.5 * (lo + hi);
        match p.shoot(mid)? {
            Fate::Hits => lo = mid,
            Fate::Rises => hi = mid,
        }
    }
    // profile from the steep side, kept while both ends of the bracket agree
    let u0 = epsilon.ln();
    let us: Vec<f64> =
        (0..PROFILE_POINTS).map(|k| u0 + (p.u_end - u0) * k as f64 / (PROFILE_POINTS - 1) as f64).collect();
    let a = p.trajectory(lo, &us)?;
    let b = p.trajectory(hi, &us)?;
    let mut profile_x = alloc::vec![0.0];
    let mut profile = alloc::vec![1.0];
    for (k, (ya, yb)) in a.iter().zip(&b).enumerate() {
        if (ya[0] - yb[0]).abs() > 1e-6 * ya[0].max(1e-300) && k > 0 {
            break;
        }
        profile_x.push(us[k].exp());
        profile.push(ya[0]);
    }
    Ok(SturmLiouvilleSolution {
        lambda,
        epsilon,
        gamma_exp: gamma,
        phi_prime_at_zero: 0.5 * (lo + hi),
        profile_x,
        profile,
    })
}

/// `Phi'(0+)` from the closed form `g(x) = sqrt(x) C_nu(c x^((1-gamma)/2))`,
/// `nu = 1/|1-gamma| = kappa`, `c = 2 sqrt(2 lambda) / |1-gamma|`, where `C`
/// is `K_nu` for `gamma = 1 - 1/kappa` and `I_nu` for `gamma = 1 + 1/kappa`:
/// the branch that stays bounded at infinity. Normalising `Phi(0) = 1` with
/// `Phi` affine on `[0, eps]` gives `Phi'(0+) = g'(eps) / (g(eps) - eps g'(eps))`.
pub fn cylindrical_crosscheck(lambda: f64, epsilon: f64, gamma: f64, kappa: f64) -> Result<f64> {
    ensure(lambda > 0.0 && epsilon > 0.0 && gamma > 0.0, "lambda", "lambda, epsilon and gamma must be > 0")?;
    ensure(kappa > 0.0, "kappa", "must be > 0")?;
    let lower = (gamma - (1.0 - 1.0 / kappa)).abs() < 1e-12;
    let upper = (gamma - (1.0 + 1.0 / kappa)).abs() < 1e-12;
    if !(lower || upper) {
        return Err(Error::Domain {
            function: "cylindrical_crosscheck",
            detail: format!("gamma = {gamma} is neither 1 - 1/kappa nor 1 + 1/kappa for kappa = {kappa}"),
        });
    }
    let nu = kappa;
    let c = 2.0 * (2.0 * lambda).sqrt() * kappa;
    let e = 0.5 * (1.0 - gamma);
    let z = c * epsilon.powf(e);
    let dz = c * e * epsilon.powf(e - 1.0);
    let (cz, dcz) = if lower {
        (bessel_k(nu, z), bessel_k_deriv(nu, z))
    } else {
        let i = bessel_i(nu, z);
        (i, bessel_i(nu + 1.0, z) + nu / z * i)
    };
    let g = epsilon.sqrt() * cz;
    let dg = 0.5 * cz / epsilon.sqrt() + epsilon.sqrt() * dcz * dz;
    let denom = g - epsilon * dg;
    if !(denom > 0.0) || !(dg <= 0.0) {
        return Err(Error::Domain {
            function: "cylindrical_crosscheck",
            detail: format!("selected branch is not decreasing and positive at eps (g = {g}, g' = {dg})"),
        });
    }
    Ok(dg / denom)
}

/// Draws of `exp(-lambda int_eps^inf L^y_{tau(1)} y^(-1-gamma) dy)` over exact
/// local-time fields.
pub fn laplace_functional_samples<R: Replicator>(
    rep: &R,
    seed: u64,
    lambda: f64,
    epsilon: f64,
    gamma: f64,
    n: usize,
    grid: FieldGrid,
) -> Vec<f64> {
    rep.map(n, |i| {
        let mut rng = RngStream::replica(seed, family::LAPLACE_FIELD, i as u64);
        let mut nodes = Vec::new();
        sample_field_nodes(1.0, grid, &mut rng, &mut nodes);
        (-lambda * power_weight_integral(&nodes, -1.0 - gamma, epsilon, f64::INFINITY)).exp()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SturmCheck {
    pub ode: f64,
    pub closed_form: f64,
    pub mc: MomentEstimate,
    /// `|exp(ode / 2) - mc| / exp(ode / 2)`.
    pub mc_rel_error: f64,
    /// `|ode - closed_form| / |closed_form|`.
    pub cross_rel_error: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn sturm_mc_check<R: Replicator>(
    rep: &R,
    seed: u64,
    lambda: f64,
    epsilon: f64,
    gamma: f64,
    kappa: f64,
    n: usize,
    grid: FieldGrid,
) -> Result<SturmCheck> {
    let sol = solve_sturm_liouville(lambda, epsilon, gamma)?;
    let closed_form = cylindrical_crosscheck(lambda, epsilon, gamma, kappa)?;
    let mc = MomentEstimate::from_values(&laplace_functional_samples(rep, seed, lambda, epsilon, gamma, n, grid));
    let target = sol.laplace_transform();
    Ok(SturmCheck {
        ode: sol.phi_prime_at_zero,
        closed_form,
        mc,
        mc_rel_error: (mc.mean - target).abs() / target,
        cross_rel_error: ((sol.phi_prime_at_zero - closed_form) / closed_form).abs(),
    })
}
