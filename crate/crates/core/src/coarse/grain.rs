use rayon::prelude::*;

use super::cover::CoverSpec;
use crate::error::{Error, Result};
use crate::measure::{ParticleMeasure, TestFunction};
use crate::numeric::det_sum;
use crate::scalar::Real;

/// Per-cell masses behind a coarse-graining.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGrainReport<R> {
    /// `nu(N_i)`.
    pub cell_mass: Vec<R>,
    /// `mu(M_i)`.
    pub ball_mass: Vec<R>,
    /// `max_i nu(N_i) / mu(M_i)` over cells with positive `nu`-mass.
    pub density_ratio: R,
}

/// `P[nu; mu, M, N] = sum_i nu(N_i) mu(. | M_i)` as a reweighting of `mu`'s particles.
pub fn coarse_grain<R: Real>(nu: &ParticleMeasure<R>, mu: &ParticleMeasure<R>, cover: &CoverSpec<R>) -> Result<ParticleMeasure<R>> {
    Ok(coarse_grain_detailed(nu, mu, cover)?.0)
}

pub fn coarse_grain_detailed<R: Real>(
    nu: &ParticleMeasure<R>,
    mu: &ParticleMeasure<R>,
    cover: &CoverSpec<R>,
) -> Result<(ParticleMeasure<R>, CoarseGrainReport<R>)> {
    let ctx = cover.ctx();
    let k = cover.len();
    let cells = nu
        .points()
        .par_iter()
        .enumerate()
        .map(|(j, p)| cover.assign_orbit(&ctx.orbit(p)?).ok_or(Error::Unassigned(j)))
        .collect::<Result<Vec<usize>>>()?;
    let mut per_cell: Vec<Vec<R>> = vec![Vec::new(); k];
    for (c, w) in cells.iter().zip(nu.weights()) {
        per_cell[*c].push(*w);
    }
    let cell_mass: Vec<R> = per_cell.iter().map(|ws| det_sum(ws)).collect();

    // balls are pairwise disjoint, so each mu-particle lies in at most one
    let ball_of = mu.points().par_iter().map(|p| cover.ball_of(p)).collect::<Result<Vec<Option<usize>>>>()?;
    let mut in_ball: Vec<Vec<R>> = vec![Vec::new(); k];
    for (b, w) in ball_of.iter().zip(mu.weights()) {
        if let Some(i) = b {
            in_ball[*i].push(*w);
        }
    }
    let ball_mass: Vec<R> = in_ball.iter().map(|ws| det_sum(ws)).collect();

    let mut density_ratio = R::zero();
    for i in 0..k {
        if cell_mass[i] > R::zero() {
            if !(ball_mass[i] > R::zero()) {
                return Err(Error::EmptyBall(i));
            }
            density_ratio = density_ratio.max(cell_mass[i] / ball_mass[i]);
        }
    }
    let (points, weights): (Vec<_>, Vec<_>) = mu
        .iter()
        .zip(&ball_of)
        .filter_map(|((p, w), b)| {
            let i = (*b)?;
            (cell_mass[i] > R::zero()).then(|| (p.clone(), cell_mass[i] * w / ball_mass[i]))
        })
        .unzip();
    let out = ParticleMeasure::new(mu.space().clone(), points, weights)?;
    Ok((out, CoarseGrainReport { cell_mass, ball_mass, density_ratio }))
}

/// `|int (g o f^t) dnu - int (g o f^t) dP|` and whether it is below `6 delta L(g)`.
pub fn approx_error_check<R: Real>(
    nu: &ParticleMeasure<R>,
    mu: &ParticleMeasure<R>,
    cover: &CoverSpec<R>,
    g: &TestFunction<R>,
    t: R,
) -> Result<(R, bool)> {
    let p = coarse_grain(nu, mu, cover)?;
    let lhs = pushed_gap(nu, &p, cover, g, t)?;
    Ok((lhs, lhs < R::c(6.0) * cover.delta() * g.lipschitz()))
}

/// `|int (g o f^t) da - int (g o f^t) db|` under the cover's system.
pub fn pushed_gap<R: Real>(
    a: &ParticleMeasure<R>,
    b: &ParticleMeasure<R>,
    cover: &CoverSpec<R>,
    g: &TestFunction<R>,
    t: R,
) -> Result<R> {
    let sys = cover.ctx().system();
    let ia = a.try_pushforward(|p| sys.evolve(t, p))?.integrate(g);
    let ib = b.try_pushforward(|p| sys.evolve(t, p))?.integrate(g);
    Ok((ia - ib).abs())
}
