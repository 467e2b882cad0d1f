use rayon::prelude::*;

use crate::error::Result;

/// Environment variable with the worker count for sample evaluation.
pub const WORKERS_ENV: &str = "TUMORSIM_WORKERS";

/// Worker count from [`WORKERS_ENV`], falling back to the available cores.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on a pool of [`worker_count`] threads. Results come
/// back in input order; the first error (in input order) is returned.
pub fn parallel_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    let run = || items.par_iter().map(&f).collect::<Vec<Result<U>>>();
    let results = match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<usize> = (0..1000).collect();
        let ys = parallel_map(&xs, |x| Ok(x * 2)).unwrap();
        assert_eq!(ys, xs.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn first_error_wins() {
        let xs: Vec<usize> = (0..100).collect();
        let r = parallel_map(&xs, |&x| {
            if x == 30 || x == 70 {
                Err(Error::Argument(format!("{x}")))
            } else {
                Ok(x)
            }
        });
        assert!(r.unwrap_err().to_string().contains("30"));
    }
}
