//! Per-replica random streams and ordered parallel execution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator used by every Monte Carlo engine.
pub type ReplicaRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replica `index` under `master`:
/// `mix64(mix64(master + γ) + (index + 1)·γ)`, with `γ` the 64-bit golden
/// ratio constant and `mix64` the SplitMix64 finalizer.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    let base = mix64(master.wrapping_add(GOLDEN_GAMMA));
    mix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn replica_rng(master: u64, index: u64) -> ReplicaRng {
    ReplicaRng::seed_from_u64(replica_seed(master, index))
}

/// Runs `job(index, rng)` for every replica in parallel and returns the
/// results in replica-index order, independent of scheduling.
pub fn run_replicas<T, F>(master: u64, replicas: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ReplicaRng) -> T + Sync + Send,
{
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(master, i as u64);
            job(i, &mut rng)
        })
        .collect()
}

/// Like [`run_replicas`], but hands each result to `sink` in replica-index
/// order as soon as its chunk completes, so only `chunk` results are alive at
/// once.
pub fn fold_replicas<T, F, S>(master: u64, replicas: usize, chunk: usize, job: F, mut sink: S)
where
    T: Send,
    F: Fn(usize, &mut ReplicaRng) -> T + Sync + Send,
    S: FnMut(usize, T),
{
    let chunk = chunk.max(1);
    let mut start = 0;
    while start < replicas {
        let end = (start + chunk).min(replicas);
        let results: Vec<T> = (start..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = replica_rng(master, i as u64);
                job(i, &mut rng)
            })
            .collect();
        for (offset, r) in results.into_iter().enumerate() {
            sink(start + offset, r);
        }
        start = end;
    }
}
