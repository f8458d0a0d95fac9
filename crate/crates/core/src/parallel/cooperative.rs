use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{hierarchical_order, GridHierarchy, TensorGrid};
use crate::kernels::{
    apply_correction, backward_sweep, compute_coefficients, forward_sweep, masstrans_apply,
    masstrans_output_region, NdBlock, OperatorSet, Region, TileConfig,
};
use crate::real::Real;
use crate::refactor::{mask_coarse, select_tiling, RefactoredData, TilingPlan};

use super::comm::{AbortFlag, Barrier, Descriptor, ExchangeMessage, Mailbox, Phase, Tag};
use super::partition::{partition, Partition, Scheme, COEFFICIENT_GHOST, MASSTRANS_GHOST};
use super::report::{CommReport, LevelComm};

/// Makes `worker` fail on entering `level` (testing aid).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaultInjection {
    pub worker: usize,
    pub level: usize,
}

#[derive(Clone, Debug)]
pub struct CoopOptions {
    pub workers: usize,
    pub scheme: Scheme,
    pub max_levels: Option<usize>,
    pub tile: Option<TileConfig>,
    pub fault: Option<FaultInjection>,
}

impl CoopOptions {
    pub fn new(workers: usize, scheme: Scheme) -> Self {
        Self {
            workers,
            scheme,
            max_levels: None,
            tile: None,
            fault: None,
        }
    }
}

/// Decomposes `grid` with `workers` cooperating workers. Each worker owns
/// the partitions assigned by `scheme`, exchanges halos for the coefficient
/// and mass-transfer phases and pipelines the correction solves across
/// partition boundaries. The result equals the serial decomposition.
pub fn cooperative_decompose<T: Real>(
    grid: &TensorGrid<T>,
    workers: usize,
    scheme: Scheme,
) -> Result<(RefactoredData<T>, CommReport)> {
    cooperative_decompose_with(grid, &CoopOptions::new(workers, scheme))
}

pub fn cooperative_decompose_with<T: Real>(
    grid: &TensorGrid<T>,
    opts: &CoopOptions,
) -> Result<(RefactoredData<T>, CommReport)> {
    let start = Instant::now();
    let h = GridHierarchy::build(grid, opts.max_levels)?;
    let parts = partition(grid.shape(), opts.workers, opts.scheme)?;
    let plan = match opts.tile {
        Some(cfg) => TilingPlan::with_config(h.ndims(), cfg),
        None => select_tiling(h.ndims(), h.shape(), crate::kernels::DEFAULT_TILE_BUDGET),
    };
    let ctx = Context {
        ops: OperatorSet::new(&h)?,
        h,
        plan,
        parts,
        workers: opts.workers,
        fault: opts.fault,
    };
    let abort = Arc::new(AbortFlag::default());
    let barrier = Barrier::new(opts.workers, abort.clone());
    let mailboxes = Mailbox::<T>::network(opts.workers, &abort);

    let full = NdBlock::from_vec(grid.shape().to_vec(), grid.values().to_vec())?;
    let mut initial: Vec<Vec<(usize, NdBlock<T>)>> = vec![Vec::new(); opts.workers];
    for (i, p) in ctx.parts.iter().enumerate() {
        initial[p.worker].push((i, full.extract(&p.region())?));
    }

    let results: Vec<Result<WorkerOutput<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = mailboxes
            .into_iter()
            .zip(initial)
            .map(|(mb, own)| {
                let (ctx, barrier, abort) = (&ctx, &barrier, &abort);
                let id = mb.id;
                let handle = s.spawn(move || {
                    let _guard = AbortOnUnwind { abort, barrier };
                    let out = run_worker(ctx, mb, own, barrier);
                    if out.is_err() {
                        abort.raise();
                        barrier.wake_all();
                    }
                    out
                });
                (id, handle)
            })
            .collect();
        handles
            .into_iter()
            .map(|(id, h)| {
                h.join().unwrap_or_else(|_| {
                    Err(Error::WorkerFailed {
                        worker: id,
                        reason: "worker panicked".into(),
                    })
                })
            })
            .collect()
    });

    let mut outputs = Vec::with_capacity(results.len());
    let mut first_err: Option<Error> = None;
    for r in results {
        match r {
            Ok(o) => outputs.push(o),
            Err(e) => {
                let secondary = matches!(&e, Error::WorkerFailed { reason, .. } if reason.starts_with("aborted"));
                if first_err.is_none() || (!secondary && is_secondary(first_err.as_ref())) {
                    first_err = Some(e);
                }
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    assemble(&ctx, outputs, start)
}

fn is_secondary(e: Option<&Error>) -> bool {
    matches!(e, Some(Error::WorkerFailed { reason, .. }) if reason.starts_with("aborted"))
}

struct AbortOnUnwind<'a> {
    abort: &'a AbortFlag,
    barrier: &'a Barrier,
}

impl Drop for AbortOnUnwind<'_> {
    fn drop(&mut self) {
        if std::thread::panicking() {
            self.abort.raise();
            self.barrier.wake_all();
        }
    }
}

struct Context {
    h: GridHierarchy,
    ops: OperatorSet,
    plan: TilingPlan,
    parts: Vec<Partition>,
    workers: usize,
    fault: Option<FaultInjection>,
}

impl Context {
    /// Level-`level` positions of partition `i` along `dim`.
    fn range(&self, i: usize, dim: usize, level: usize) -> (usize, usize) {
        let idx = self.h.indices(dim, level);
        let p = &self.parts[i];
        (
            idx.partition_point(|&g| g < p.lo[dim]),
            idx.partition_point(|&g| g < p.hi[dim]),
        )
    }

    /// Box of partition `i` in a working array whose dimensions `< coarse_below`
    /// are already at level `level - 1`.
    fn working_box(&self, i: usize, level: usize, coarse_below: usize) -> Region {
        let nd = self.h.ndims();
        let (lo, hi) = (0..nd)
            .map(|d| self.range(i, d, if d < coarse_below { level - 1 } else { level }))
            .unzip();
        Region::new(lo, hi)
    }

    fn working_shape(&self, level: usize, coarse_below: usize) -> Vec<usize> {
        (0..self.h.ndims())
            .map(|d| {
                self.h
                    .indices(d, if d < coarse_below { level - 1 } else { level })
                    .len()
            })
            .collect()
    }
}

#[derive(Default)]
struct LevelCounters {
    coefficient: u64,
    masstrans: Vec<u64>,
    carry: Vec<u64>,
    secs: f64,
}

struct WorkerOutput<T> {
    /// (partition, level) → level values after the coefficient phase.
    levels: HashMap<(usize, usize), NdBlock<T>>,
    coarsest: Vec<(usize, NdBlock<T>)>,
    counters: Vec<LevelCounters>,
}

fn run_worker<T: Real>(
    ctx: &Context,
    mut mb: Mailbox<T>,
    mut own: Vec<(usize, NdBlock<T>)>,
    barrier: &Barrier,
) -> Result<WorkerOutput<T>> {
    let me = mb.id;
    let nd = ctx.h.ndims();
    let nlev = ctx.h.levels();
    let mut out = WorkerOutput {
        levels: HashMap::new(),
        coarsest: Vec::new(),
        counters: Vec::new(),
    };
    for l in (1..=nlev).rev() {
        if ctx.fault == Some(super::FaultInjection { worker: me, level: l }) {
            return Err(Error::WorkerFailed {
                worker: me,
                reason: format!("injected fault at level {l}"),
            });
        }
        let t0 = Instant::now();
        let lops = ctx.ops.level(l);
        let mut cnt = LevelCounters {
            masstrans: vec![0; nd],
            carry: vec![0; nd],
            ..Default::default()
        };

        // coefficients: halo of one position on every side
        let shape = ctx.h.level_shape(l);
        let boxes: Vec<Region> = (0..ctx.parts.len()).map(|i| ctx.working_box(i, l, 0)).collect();
        let need = |j: usize| {
            let mut r = boxes[j].clone();
            for (d, &n) in shape.iter().enumerate() {
                r = r.widened(d, COEFFICIENT_GHOST, n);
            }
            r
        };
        let tag = Tag {
            level: l,
            phase: Phase::Coefficient,
        };
        let mut halo = exchange(ctx, &mut mb, tag, &own, &boxes, need, &mut cnt.coefficient)?;
        for ((i, blk), wide) in own.iter_mut().zip(halo.iter_mut()) {
            if boxes[*i].is_empty() {
                continue;
            }
            compute_coefficients(wide, lops, &boxes[*i], ctx.plan.grid_tiling())?;
            *blk = wide.extract(&boxes[*i])?;
        }
        drop(halo);
        for (i, blk) in &own {
            out.levels.insert((*i, l), blk.clone());
        }
        barrier.wait(me)?;

        // correction, one dimension at a time
        let level_blocks = own.clone();
        let mut work = own;
        let mut fused_pending = true;
        for d in 0..nd {
            if ctx.h.is_fixed(d, l) {
                continue;
            }
            let wshape = ctx.working_shape(l, d);
            let boxes: Vec<Region> = (0..ctx.parts.len()).map(|i| ctx.working_box(i, l, d)).collect();
            let need = |j: usize| boxes[j].widened(d, MASSTRANS_GHOST, wshape[d]);
            let tag = Tag {
                level: l,
                phase: Phase::MassTrans(d),
            };
            let halo = exchange(ctx, &mut mb, tag, &work, &boxes, need, &mut cnt.masstrans[d])?;
            let tiling = ctx.plan.tiling_for_dim(d);
            let mut next = Vec::with_capacity(work.len());
            for ((i, _), wide) in work.iter().zip(&halo) {
                let out_region = masstrans_output_region(&boxes[*i], &lops[d]);
                let f = if boxes[*i].is_empty() {
                    NdBlock::zeros(&ctx.working_box(*i, l, d + 1))
                } else if fused_pending && d != 0 {
                    masstrans_apply(&mask_coarse(wide, lops), lops, d, false, &out_region, tiling)?
                } else {
                    masstrans_apply(wide, lops, d, fused_pending, &out_region, tiling)?
                };
                next.push((*i, f));
            }
            fused_pending = false;
            work = next;
            barrier.wait(me)?;

            pipelined_solve(ctx, &mut mb, &mut work, l, d, &mut cnt.carry[d])?;
            barrier.wait(me)?;
        }

        // apply the correction to the coarse nodes this worker owns
        let mut coarse_next = Vec::with_capacity(work.len());
        for ((i, z), (_, lvl)) in work.iter().zip(&level_blocks) {
            let cbox = ctx.working_box(*i, l, nd);
            let mut c = NdBlock::zeros(&cbox);
            let cps: Vec<&[usize]> = (0..nd).map(|d| lops[d].coarse_positions()).collect();
            let mut pos = vec![0; nd];
            let mut k = 0;
            let cshape = cbox.shape();
            let data = c.data_mut();
            crate::grid::for_each_index(&cshape, |q| {
                for d in 0..nd {
                    pos[d] = cps[d][cbox.lo[d] + q[d]];
                }
                data[k] = lvl.get(&pos);
                k += 1;
            });
            apply_correction(c.data_mut(), z.data(), 1)?;
            coarse_next.push((*i, c));
        }
        own = coarse_next;
        barrier.wait(me)?;
        cnt.secs = t0.elapsed().as_secs_f64();
        out.counters.push(cnt);
    }
    out.coarsest = own;
    Ok(out)
}

/// Builds, for each owned partition `j`, a block over `need(j)` filled from
/// the local partitions and from boundary messages of the other workers.
/// Counts the elements received.
fn exchange<T: Real>(
    ctx: &Context,
    mb: &mut Mailbox<T>,
    tag: Tag,
    own: &[(usize, NdBlock<T>)],
    boxes: &[Region],
    need: impl Fn(usize) -> Region,
    received: &mut u64,
) -> Result<Vec<NdBlock<T>>> {
    let me = mb.id;
    let owner = |i: usize| ctx.parts[i].worker;
    for (i, blk) in own {
        for j in (0..ctx.parts.len()).filter(|&j| owner(j) != me) {
            let ov = need(j).intersect(&boxes[*i]);
            if ov.is_empty() {
                continue;
            }
            mb.send(ExchangeMessage {
                sender: me,
                receiver: owner(j),
                tag,
                payload: blk.extract(&ov)?.into_data(),
                descriptor: Descriptor::Face(ov),
            })?;
        }
    }
    let mut wide: Vec<NdBlock<T>> = own.iter().map(|(j, _)| NdBlock::zeros(&need(*j))).collect();
    for (w, (j, _)) in wide.iter_mut().zip(own) {
        if w.is_empty() {
            continue;
        }
        for (_, blk) in own {
            w.paste(blk);
        }
        for i in (0..ctx.parts.len()).filter(|&i| owner(i) != me) {
            let ov = need(*j).intersect(&boxes[i]);
            if ov.is_empty() {
                continue;
            }
            let want = Descriptor::Face(ov.clone());
            let msg = mb.recv(|m| m.tag == tag && m.sender == owner(i) && m.descriptor == want)?;
            *received += msg.payload.len() as u64;
            w.paste(&NdBlock::new(ov.lo.clone(), ov.shape(), msg.payload)?);
        }
    }
    Ok(wide)
}

/// Solve chains along `dim`: partitions sharing the same global transverse
/// extent, ordered along `dim`. A partition's index in its chain is its
/// pipeline stage. Keys use the global boxes because at coarse levels
/// distinct partitions can collapse to the same (empty) level range.
pub(crate) fn chains(parts: &[Partition], dim: usize) -> Vec<Vec<usize>> {
    let mut groups: Vec<(Region, Vec<usize>)> = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let mut key = p.region();
        key.lo[dim] = 0;
        key.hi[dim] = 0;
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, mut v)| {
            v.sort_by_key(|&i| parts[i].lo[dim]);
            v
        })
        .collect()
}

fn pipelined_solve<T: Real>(
    ctx: &Context,
    mb: &mut Mailbox<T>,
    work: &mut [(usize, NdBlock<T>)],
    l: usize,
    d: usize,
    received: &mut u64,
) -> Result<()> {
    let me = mb.id;
    let op = &ctx.ops.level(l)[d];
    let tiling = ctx.plan.tiling_for_dim(d);
    let boxes: Vec<Region> = (0..ctx.parts.len()).map(|i| ctx.working_box(i, l, d + 1)).collect();
    let chains = chains(&ctx.parts, d);
    // partition → (chain, stage)
    let mut place = vec![(0, 0); boxes.len()];
    for (c, chain) in chains.iter().enumerate() {
        for (s, &i) in chain.iter().enumerate() {
            place[i] = (c, s);
        }
    }
    let mut order: Vec<usize> = (0..work.len()).collect();
    order.sort_by_key(|&k| (place[work[k].0].1, place[work[k].0].0));

    for backward in [false, true] {
        let phase = if backward { Phase::Backward(d) } else { Phase::Forward(d) };
        let tag = Tag { level: l, phase };
        let mut local: HashMap<usize, Option<Vec<T>>> = HashMap::new();
        let seq: Vec<usize> = if backward { order.iter().rev().copied().collect() } else { order.clone() };
        for k in seq {
            let i = work[k].0;
            let (c, s) = place[i];
            let chain = &chains[c];
            let (from, to) = if backward {
                (chain.get(s + 1).copied(), s.checked_sub(1).map(|t| chain[t]))
            } else {
                (s.checked_sub(1).map(|t| chain[t]), chain.get(s + 1).copied())
            };
            let carry: Option<Vec<T>> = match from {
                None => None,
                Some(src) if ctx.parts[src].worker == me => local.remove(&i).flatten(),
                Some(src) => {
                    let msg = mb.recv(|m| {
                        m.tag == tag
                            && m.sender == ctx.parts[src].worker
                            && matches!(&m.descriptor, Descriptor::Carry { segment, .. } if *segment == boxes[i])
                    })?;
                    *received += msg.payload.len() as u64;
                    match msg.descriptor {
                        Descriptor::Carry { present: true, .. } => Some(msg.payload),
                        _ => None,
                    }
                }
            };
            let blk = &mut work[k].1;
            let next = if backward {
                backward_sweep(blk, d, op, carry.as_deref(), tiling)?
            } else {
                forward_sweep(blk, d, op, carry.as_deref(), tiling)?
            };
            if let Some(dst) = to {
                if ctx.parts[dst].worker == me {
                    local.insert(dst, next);
                } else {
                    let present = next.is_some();
                    mb.send(ExchangeMessage {
                        sender: me,
                        receiver: ctx.parts[dst].worker,
                        tag,
                        descriptor: Descriptor::Carry {
                            segment: boxes[dst].clone(),
                            present,
                        },
                        payload: next.unwrap_or_default(),
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn assemble<T: Real>(
    ctx: &Context,
    outputs: Vec<WorkerOutput<T>>,
    start: Instant,
) -> Result<(RefactoredData<T>, CommReport)> {
    let h = &ctx.h;
    let nlev = h.levels();
    let nd = h.ndims();
    let mut classes: Vec<Vec<T>> = vec![Vec::new(); nlev + 1];
    let mut levels = Vec::with_capacity(nlev);
    for l in (1..=nlev).rev() {
        let mut full = NdBlock::zeros(&Region::full(&h.level_shape(l)));
        for o in &outputs {
            for ((_, ll), blk) in &o.levels {
                if *ll == l {
                    full.paste(blk);
                }
            }
        }
        let order = hierarchical_order(h, l);
        let ncoarse = h.level_len(l - 1);
        let data = full.data();
        classes[l] = order[ncoarse..].iter().map(|&i| data[i]).collect();

        let k = nlev - l;
        let mut lc = LevelComm::new(l, nd);
        for o in &outputs {
            let c = &o.counters[k];
            lc.coefficient_elems += c.coefficient;
            for d in 0..nd {
                lc.masstrans_elems[d] += c.masstrans[d];
                lc.carry_elems[d] += c.carry[d];
            }
            lc.secs = lc.secs.max(c.secs);
        }
        lc.level_elems = h.level_len(l) as u64;
        for d in 0..nd {
            if !h.is_fixed(d, l) {
                let boxes: Vec<Region> = (0..ctx.parts.len()).map(|i| ctx.working_box(i, l, d + 1)).collect();
                lc.stage_idle[d] = stage_idle(ctx, &boxes, d);
            }
        }
        levels.push(lc);
    }
    let mut coarse = NdBlock::zeros(&Region::full(&h.level_shape(0)));
    for o in &outputs {
        for (_, blk) in &o.coarsest {
            coarse.paste(blk);
        }
    }
    classes[0] = coarse.into_data();
    let mut owned = vec![0u64; ctx.workers];
    for p in &ctx.parts {
        owned[p.worker] += p.len() as u64;
    }
    let report = CommReport {
        workers: ctx.workers,
        scheme: ctx.parts[0].scheme,
        partitions: ctx.parts.len(),
        owned_elems: owned,
        levels,
        total_secs: start.elapsed().as_secs_f64(),
    };
    let data = RefactoredData {
        shape: h.shape().to_vec(),
        coords: h.coords().to_vec(),
        levels: nlev,
        fixed_axes: false,
        classes,
    };
    Ok((data, report))
}

/// Idle workers at each pipeline stage of the solve along `dim`.
fn stage_idle(ctx: &Context, boxes: &[Region], dim: usize) -> Vec<usize> {
    let chains = chains(&ctx.parts, dim);
    let stages = chains.iter().map(Vec::len).max().unwrap_or(0);
    (0..stages)
        .map(|s| {
            let mut busy = vec![false; ctx.workers];
            for chain in &chains {
                if let Some(&i) = chain.get(s) {
                    if !boxes[i].is_empty() {
                        busy[ctx.parts[i].worker] = true;
                    }
                }
            }
            busy.iter().filter(|b| !**b).count()
        })
        .collect()
}
