use super::bins::{BinMapper, BinnedMatrix};
use super::histogram::{best_split_from_histogram, build_histogram, HistSplit, Histogram};
use super::LeafWiseConfig;
use crate::error::{Error, Result};
use crate::exact::GAIN_TIE_TOLERANCE;
use crate::memory::MemoryMeter;
use crate::objective::{leaf_weight, GradPair};
use crate::tree::{RegTree, TreeBuilder};

/// One executed split, in execution order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEvent {
    /// Arena id of the node that was split.
    pub node: usize,
    pub depth: usize,
    pub feature: usize,
    pub bin: usize,
    pub threshold: f64,
    pub gain: f64,
}

struct Leaf {
    node: usize,
    rows: Vec<usize>,
    depth: usize,
    total: GradPair,
    best: Option<HistSplit>,
    hist: Option<Histogram>,
}

/// Grows one tree best-first: the live leaf with the highest split gain is
/// split next, until the leaf budget is spent, no leaf has a positive gain,
/// or every remaining candidate sits at the depth cap.
pub fn grow_leaf_wise(
    binned: &BinnedMatrix,
    mapper: &BinMapper,
    grads: &[GradPair],
    config: &LeafWiseConfig,
) -> Result<RegTree> {
    grow_leaf_wise_traced(binned, mapper, grads, config).map(|(t, _)| t)
}

/// Like [`grow_leaf_wise`], also returning every split decision in order.
pub fn grow_leaf_wise_traced(
    binned: &BinnedMatrix,
    mapper: &BinMapper,
    grads: &[GradPair],
    config: &LeafWiseConfig,
) -> Result<(RegTree, Vec<SplitEvent>)> {
    grow_metered(binned, mapper, grads, config, &mut MemoryMeter::new())
}

pub(super) fn grow_metered(
    binned: &BinnedMatrix,
    mapper: &BinMapper,
    grads: &[GradPair],
    config: &LeafWiseConfig,
    meter: &mut MemoryMeter,
) -> Result<(RegTree, Vec<SplitEvent>)> {
    if binned.n_rows() == 0 {
        return Err(Error::arg("cannot grow a tree over zero rows"));
    }
    let base = &config.base;
    let hist_bytes = Histogram::byte_size_for(mapper);
    let row_bytes = binned.n_rows() * std::mem::size_of::<usize>();
    meter.alloc(row_bytes);

    let evaluate = |rows: Vec<usize>,
                    node: usize,
                    depth: usize,
                    hist: Option<Histogram>,
                    meter: &mut MemoryMeter|
     -> Result<Leaf> {
        let total = rows.iter().fold(GradPair::default(), |a, &i| a + grads[i]);
        if depth >= base.max_depth || rows.len() < 2 {
            if let Some(h) = &hist {
                meter.free(h.byte_size());
            }
            return Ok(Leaf { node, rows, depth, total, best: None, hist: None });
        }
        let hist = match hist {
            Some(h) => h,
            None => {
                meter.alloc(hist_bytes);
                build_histogram(&rows, grads, binned, mapper)?
            }
        };
        let best = best_split_from_histogram(
            &hist,
            base.l2_penalty,
            base.leaf_penalty,
            base.min_samples_leaf,
        );
        let keep = config.histogram_subtraction && best.is_some();
        if !keep {
            meter.free(hist.byte_size());
        }
        Ok(Leaf {
            node,
            rows,
            depth,
            total,
            best,
            hist: keep.then_some(hist),
        })
    };

    let mut builder = TreeBuilder::new();
    let mut leaves = vec![evaluate((0..binned.n_rows()).collect(), 0, 0, None, meter)?];
    let mut events = Vec::new();

    while leaves.len() < config.max_leaves {
        let Some(pick) = pick_leaf(&leaves) else { break };
        let leaf = leaves.remove(pick);
        let split = leaf.best.expect("picked leaf has a split");
        let col = binned.column(split.feature);
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = leaf
            .rows
            .iter()
            .partition(|&&i| (col[i] as usize) <= split.bin);
        let threshold = mapper.threshold(split.feature, split.bin);
        let (l, r) = builder.split(leaf.node, split.feature, threshold);
        events.push(SplitEvent {
            node: leaf.node,
            depth: leaf.depth,
            feature: split.feature,
            bin: split.bin,
            threshold,
            gain: split.gain,
        });

        let (left_hist, right_hist) = match leaf.hist {
            Some(parent) => {
                // build the smaller child directly, derive the sibling
                let small_left = left_rows.len() <= right_rows.len();
                let small_rows = if small_left { &left_rows } else { &right_rows };
                meter.alloc(2 * hist_bytes);
                let small = build_histogram(small_rows, grads, binned, mapper)?;
                let large = parent.subtract(&small);
                meter.free(parent.byte_size());
                if small_left {
                    (Some(small), Some(large))
                } else {
                    (Some(large), Some(small))
                }
            }
            None => (None, None),
        };
        let depth = leaf.depth + 1;
        // children replace the parent at the end, left first, so creation order
        // is the vector order
        leaves.push(evaluate(left_rows, l, depth, left_hist, meter)?);
        leaves.push(evaluate(right_rows, r, depth, right_hist, meter)?);
    }

    for leaf in &leaves {
        if let Some(h) = &leaf.hist {
            meter.free(h.byte_size());
        }
        builder.set_leaf(
            leaf.node,
            leaf_weight(leaf.total.g, leaf.total.h, base.l2_penalty)?,
        );
    }
    meter.free(row_bytes);
    Ok((builder.finish(), events))
}

/// Live leaf with the largest gain; among gains tied within tolerance the
/// earliest-created leaf wins. `leaves` is kept in creation order.
fn pick_leaf(leaves: &[Leaf]) -> Option<usize> {
    let best = leaves
        .iter()
        .filter_map(|l| l.best.map(|s| s.gain))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return None;
    }
    let floor = best - GAIN_TIE_TOLERANCE * best.abs();
    leaves
        .iter()
        .position(|l| l.best.is_some_and(|s| s.gain >= floor))
}
