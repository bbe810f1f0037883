//! Data-parallel loop helpers.
//!
//! With the `parallel` feature these dispatch to rayon; without it they run the
//! same closures sequentially. Each chunk is processed by exactly one closure
//! call and reductions are summed in chunk order, so results are bitwise
//! identical regardless of the number of worker threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many elements per task, splitting costs more than it saves.
#[cfg(feature = "parallel")]
const MIN_TASK_ELEMS: usize = 1 << 14;

/// Whether a loop over `elems` elements is worth handing to rayon.
#[cfg(feature = "parallel")]
fn go_parallel(elems: usize) -> bool {
    rayon::current_num_threads() > 1 && elems >= 2 * MIN_TASK_ELEMS
}

/// Runs `f(state, chunk_index, chunk)` over consecutive `size`-element chunks.
/// `init` builds per-worker scratch state.
pub fn for_each_chunk_init<T, S, I, F>(data: &mut [T], size: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if go_parallel(data.len()) {
        let min_chunks = MIN_TASK_ELEMS.div_ceil(size.max(1));
        data.par_chunks_mut(size)
            .enumerate()
            .with_min_len(min_chunks)
            .for_each_init(init, |s, (i, c)| f(s, i, c));
        return;
    }

    {
        let mut s = init();
        data.chunks_mut(size)
            .enumerate()
            .for_each(|(i, c)| f(&mut s, i, c));
    }
}

pub fn for_each_chunk<T, F>(data: &mut [T], size: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    for_each_chunk_init(data, size, || (), |_, i, c| f(i, c));
}

/// Maps each index in `0..count` to a value, preserving order.
pub fn map_indexed<R, F>(count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if rayon::current_num_threads() > 1 {
        return (0..count).into_par_iter().map(f).collect();
    }
    (0..count).map(f).collect()
}

/// Deterministic sum: `count` partials computed independently, then added in index order.
pub fn sum_indexed<F>(count: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(count, f).into_iter().sum()
}

/// Deterministic maximum over independently computed non-negative partials.
/// A NaN partial poisons the result.
pub fn max_indexed<F>(count: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(count, f).into_iter().fold(0.0, |acc, x| {
        if acc.is_nan() || x.is_nan() {
            f64::NAN
        } else {
            acc.max(x)
        }
    })
}

/// Maps a slice of independent jobs, preserving order.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if rayon::current_num_threads() > 1 {
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}
