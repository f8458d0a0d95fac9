use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::grid::TensorGrid;
use crate::real::Real;
use crate::refactor::{decompose, RefactoredData};

use super::cooperative::cooperative_decompose;
use super::partition::Scheme;

/// Decomposes independent blocks on `workers` threads, block `i` going to
/// worker `i mod workers`. Output order follows `grids`.
pub fn embarrassing_decompose<T: Real>(
    grids: &[TensorGrid<T>],
    workers: usize,
) -> Result<Vec<RefactoredData<T>>> {
    run_groups(grids, workers, |g| decompose(g, None))
}

/// `groups × per_group` workers: blocks are dealt to groups round-robin and
/// each group decomposes its blocks cooperatively with `per_group` workers.
pub fn grouped_decompose<T: Real>(
    grids: &[TensorGrid<T>],
    groups: usize,
    per_group: usize,
    scheme: Scheme,
) -> Result<Vec<RefactoredData<T>>> {
    if per_group == 0 {
        return Err(Error::InvalidArgument("each group needs at least one worker".into()));
    }
    run_groups(grids, groups, |g| cooperative_decompose(g, per_group, scheme).map(|(r, _)| r))
}

fn run_groups<T: Real>(
    grids: &[TensorGrid<T>],
    groups: usize,
    job: impl Fn(&TensorGrid<T>) -> Result<RefactoredData<T>> + Sync,
) -> Result<Vec<RefactoredData<T>>> {
    if groups == 0 {
        return Err(Error::InvalidArgument("at least one worker is required".into()));
    }
    let slots: Vec<Mutex<Option<Result<RefactoredData<T>>>>> =
        grids.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for w in 0..groups.min(grids.len()) {
            let (slots, job) = (&slots, &job);
            s.spawn(move || {
                for i in (w..grids.len()).step_by(groups) {
                    let r = job(&grids[i]);
                    *slots[i].lock().expect("result slot") = Some(r);
                }
            });
        }
    });
    slots
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            m.into_inner().expect("result slot").unwrap_or_else(|| {
                Err(Error::WorkerFailed {
                    worker: i % groups,
                    reason: format!("block {i} was not processed"),
                })
            })
        })
        .collect()
}
