use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::FleetSpec;
use crate::uncertainty::{restrict, semidefinite_cholesky, Source, UncertaintyError};

/// FNV-1a, used to key random streams by microgrid id.
fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent stream for one (period, microgrid, source) triple.
fn stream(seed: u64, t: usize, mg_id: &str, source: Source) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = fnv1a(mg_id)
        .wrapping_mul(31)
        .wrapping_add(t as u64)
        .wrapping_mul(7)
        .wrapping_add(source.index() as u64);
    rng.set_stream(key);
    rng
}

/// Correlated draws of the three error sources of a group of microgrids in
/// one period.
///
/// Each microgrid/source pair owns a random stream derived from the base
/// seed, the period and the microgrid id, so the draws do not depend on how
/// periods are spread over threads.
pub(crate) struct PeriodSampler {
    streams: Vec<[ChaCha8Rng; 3]>,
    /// Per source: Cholesky factor of the members' correlation matrix.
    factors: [Vec<Vec<f64>>; 3],
    /// Per member and source: mean and sigma.
    params: Vec<[(f64, f64); 3]>,
    z: Vec<[f64; 3]>,
}

impl PeriodSampler {
    pub(crate) fn new(fleet: &FleetSpec, members: &[usize], t: usize, seed: u64) -> Result<Self, UncertaintyError> {
        let model = &fleet.uncertainty;
        let factor = |s: Source| -> Result<Vec<Vec<f64>>, UncertaintyError> {
            semidefinite_cholesky(&restrict(&model.correlation_or_identity(s), members))
        };
        let factors = [factor(Source::Wind)?, factor(Source::Pv)?, factor(Source::Demand)?];
        let streams = members
            .iter()
            .map(|&n| {
                let id = &fleet.microgrids[n].id;
                Source::ALL.map(|s| stream(seed, t, id, s))
            })
            .collect();
        let params = members
            .iter()
            .map(|&n| Source::ALL.map(|s| (model.microgrids[n].mean(s, t), model.sigma(fleet, n, s, t))))
            .collect();
        Ok(Self {
            streams,
            factors,
            params,
            z: vec![[0.0; 3]; members.len()],
        })
    }

    /// Fills `out[k]` with the net error of member `k` and returns their sum.
    pub(crate) fn draw(&mut self, out: &mut [f64]) -> f64 {
        for (z, rngs) in self.z.iter_mut().zip(self.streams.iter_mut()) {
            for s in 0..3 {
                z[s] = rngs[s].sample(StandardNormal);
            }
        }
        let mut total = 0.0;
        for (k, slot) in out.iter_mut().enumerate() {
            let mut net = 0.0;
            for source in Source::ALL {
                let s = source.index();
                let l = &self.factors[s][k];
                let std: f64 = (0..=k).map(|j| l[j] * self.z[j][s]).sum();
                let (mu, sigma) = self.params[k][s];
                net += source.sign() * (mu + sigma * std);
            }
            *slot = net;
            total += net;
        }
        total
    }
}

/// Draws of the net demand error `ΔN_t` for a group of microgrids.
#[derive(Debug, Clone, PartialEq)]
pub struct NetErrorSamples {
    /// `per_microgrid[k][i]`: draw `i` of member `k`.
    pub per_microgrid: Vec<Vec<f64>>,
    /// Sum over members of each draw.
    pub total: Vec<f64>,
}

/// `n` draws of `ΔN_t` for the microgrids in `members`, correlated across
/// microgrids per source and independent across sources.
pub fn sample_net_errors(
    fleet: &FleetSpec,
    members: &[usize],
    t: usize,
    n: usize,
    seed: u64,
) -> Result<NetErrorSamples, UncertaintyError> {
    let mut sampler = PeriodSampler::new(fleet, members, t, seed)?;
    let mut per_microgrid = vec![Vec::with_capacity(n); members.len()];
    let mut total = Vec::with_capacity(n);
    let mut row = vec![0.0; members.len()];
    for _ in 0..n {
        total.push(sampler.draw(&mut row));
        for (col, &v) in per_microgrid.iter_mut().zip(&row) {
            col.push(v);
        }
    }
    Ok(NetErrorSamples { per_microgrid, total })
}
