//! Trial fan-out. With the `parallel` feature, trials run on the rayon pool;
//! otherwise (or with [`Exec::Sequential`]) they run in a plain loop.
//!
//! Merges are count additions, so the result never depends on how trials
//! were split across workers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Folds `step` over trial indices `0..trials`, merging partial
    /// accumulators with `merge`. `merge` must be associative and commutative.
    pub fn fold_trials<T, I, S, M>(self, trials: u64, identity: I, step: S, merge: M) -> T
    where
        T: Send,
        I: Fn() -> T + Sync + Send,
        S: Fn(T, u64) -> T + Sync + Send,
        M: Fn(T, T) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..trials)
                .into_par_iter()
                .fold(&identity, &step)
                .reduce(&identity, &merge),
            _ => {
                let _ = &merge;
                (0..trials).fold(identity(), step)
            }
        }
    }

    /// Number of trials in `0..trials` for which `pred` holds.
    pub fn count_trials<P>(self, trials: u64, pred: P) -> u64
    where
        P: Fn(u64) -> bool + Sync + Send,
    {
        self.fold_trials(trials, || 0u64, |acc, t| acc + pred(t) as u64, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let f = |t: u64| t % 7 == 3;
        let a = Exec::Sequential.count_trials(10_000, f);
        let b = Exec::Parallel.count_trials(10_000, f);
        assert_eq!(a, b);
        assert_eq!(a, (0..10_000u64).filter(|&t| f(t)).count() as u64);
    }

    #[test]
    fn histogram_fold() {
        let hist = |exec: Exec| {
            exec.fold_trials(
                1000,
                || vec![0u64; 5],
                |mut h, t| {
                    h[(t % 5) as usize] += 1;
                    h
                },
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
        };
        assert_eq!(hist(Exec::Sequential), vec![200; 5]);
        assert_eq!(hist(Exec::Parallel), vec![200; 5]);
    }
}
