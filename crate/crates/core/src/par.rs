//! Deterministic fork-join map over an index range.
//!
//! Work is split into contiguous chunks, one per worker, and results are
//! concatenated in index order, so the output is identical for any thread
//! count. Replicated experiments combine this with per-index derived
//! random streams.

/// Apply `f` to every index in `0..count`, using up to `threads` workers.
pub fn par_map<T, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(count.max(1));
    if threads <= 1 || count < 2 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(threads);
    let mut pieces: Vec<Vec<T>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..threads {
            let start = w * chunk;
            let end = ((w + 1) * chunk).min(count);
            if start >= end {
                break;
            }
            let f = &f;
            handles.push(scope.spawn(move || (start..end).map(f).collect::<Vec<T>>()));
        }
        for handle in handles {
            pieces.push(handle.join().expect("worker panicked"));
        }
    });
    let mut out = Vec::with_capacity(count);
    for piece in pieces {
        out.extend(piece);
    }
    out
}
