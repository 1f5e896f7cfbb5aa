//! Multi-threaded Monte Carlo drivers.
//!
//! Shards are seeded by index and tallies are sums of integers, so the result
//! never depends on the number of worker threads.

use boxgal_core::discprob::{DiscMc, DiscSquareEstimate, DiscTally};
use boxgal_core::galois_mc::{GaloisMc, GaloisReport, GaloisTally};
use rayon::prelude::*;

/// A rayon pool with `threads` workers, or the default parallelism for `None`/0.
pub fn pool(threads: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.filter(|&t| t > 0) {
        b = b.num_threads(t);
    }
    Ok(b.build()?)
}

pub fn disc_mc(mc: &DiscMc, seed: u64, samples: u64, pool: &rayon::ThreadPool) -> DiscSquareEstimate {
    let tally = pool.install(|| {
        (0..DiscMc::shard_count(samples))
            .into_par_iter()
            .map(|s| mc.run_shard(seed, samples, s))
            .reduce(DiscTally::default, |mut a, b| {
                a += b;
                a
            })
    });
    mc.estimate(seed, tally)
}

pub fn galois_mc(
    mc: &GaloisMc,
    seed: u64,
    samples: u64,
    pool: &rayon::ThreadPool,
) -> anyhow::Result<GaloisReport> {
    let tally = pool.install(|| {
        (0..DiscMc::shard_count(samples))
            .into_par_iter()
            .map(|s| mc.run_shard(seed, samples, s))
            .try_reduce(GaloisTally::default, |mut a, b| {
                a += b;
                Ok(a)
            })
    })?;
    Ok(mc.report(seed, tally))
}

#[cfg(test)]
mod tests {
    use super::*;
    use boxgal_core::discprob::default_filter_primes;
    use boxgal_core::measures::{CoeffLaw, PolyLaw};

    #[test]
    fn thread_count_does_not_change_results() {
        let law = PolyLaw::iid(CoeffLaw::uniform_box(0, 20).unwrap(), 3);
        let mc = DiscMc::new(&law, &default_filter_primes(3)).unwrap();
        let serial = mc.run(5, 10_000).unwrap();
        for t in [1, 3, 8] {
            let par = disc_mc(&mc, 5, 10_000, &pool(Some(t)).unwrap());
            assert_eq!(par, serial);
        }
        let g = GaloisMc::new(&law, 30).unwrap();
        let serial = g.run(5, 5_000).unwrap();
        let par = galois_mc(&g, 5, 5_000, &pool(Some(4)).unwrap()).unwrap();
        assert_eq!(par, serial);
    }
}
