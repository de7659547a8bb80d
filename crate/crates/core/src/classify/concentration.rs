use rayon::prelude::*;

use super::series::{check_grid, SeriesRecord};
use crate::error::{Error, Result};
use crate::measure::Point;
use crate::scalar::Real;
use crate::systems::CounterexampleParams;

pub const DEFAULT_QUADRATURE_N: usize = 100_000;

/// `(1 + c/T)^a T^(a - 1) - c/T` with `a = exp(-eps/M)`.
pub fn concentration_bound_raw<R: Real>(c: R, eps_over_m: R, t: R) -> R {
    let a = (-eps_over_m).exp();
    (R::one() + c / t).powf(a) * t.powf(a - R::one()) - c / t
}

/// Closed-form bound on `1 - p_T(B_eps(f^{psi(T)} x))` for the fiber `y0` of `params`.
pub fn concentration_bound<R: Real>(params: &CounterexampleParams<R>, eps: R, t: R) -> Result<R> {
    let c = params.c().ok_or_else(|| Error::DomainError("concentration bound needs y0 != 0".into()))?;
    if !(eps > R::zero() && t > R::zero()) {
        return Err(Error::InvalidArgument("need eps > 0 and T > 0".into()));
    }
    Ok(concentration_bound_raw(c, eps / params.field_bound(), t))
}

/// `T -> 1 - p_T(B_eps(f^{psi(T)} x))`, where `p_T` is the time average over
/// `[0, T]` of the base-point measures `delta_{f^{psi(t)} x}`, computed with a
/// composite midpoint rule of `quadrature_n` nodes.
pub fn concentration_profile<R: Real>(
    params: &CounterexampleParams<R>,
    base_point: &Point<R>,
    eps: R,
    t_grid: &[R],
    quadrature_n: usize,
) -> Result<SeriesRecord<R>> {
    if params.c().is_none() {
        return Err(Error::DomainError("concentration profile needs y0 != 0".into()));
    }
    if !(eps > R::zero()) || quadrature_n == 0 {
        return Err(Error::InvalidArgument("need eps > 0 and quadrature_n > 0".into()));
    }
    check_grid(t_grid)?;
    let base = params.base();
    let space = base.space();
    let values = t_grid
        .iter()
        .map(|&t| {
            if !(t > R::zero()) {
                return Err(Error::InvalidArgument("profile times must be positive".into()));
            }
            let target = base.flow(params.psi(t)?, base_point);
            let h = t / R::c(quadrature_n as f64);
            let outside = (0..quadrature_n)
                .into_par_iter()
                .map(|k| {
                    let s = params.psi((R::c(k as f64) + R::c(0.5)) * h)?;
                    Ok(usize::from(space.distance(&base.flow(s, base_point), &target) >= eps))
                })
                .collect::<Result<Vec<usize>>>()?
                .into_iter()
                .sum::<usize>();
            Ok(R::c(outside as f64) / R::c(quadrature_n as f64))
        })
        .collect::<Result<Vec<R>>>()?;
    SeriesRecord::new(format!("concentration y0={}", params.y0()), t_grid.to_vec(), values)
}
