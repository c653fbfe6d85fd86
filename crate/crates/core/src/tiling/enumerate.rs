use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::{Rect, Tiling};

/// Every tiling of a rectangle by `n` rectangles, one per double order up to
/// relabelling of cells. Each representative is the least tiling of its
/// class in compressed integer coordinates. Sorted.
pub fn enumerate_tilings(n: usize) -> Vec<Tiling> {
    assert!((1..=5).contains(&n), "cell count must be in 1..=5");
    let shapes: Vec<(usize, usize)> = (1..=n).flat_map(|w| (1..=n).map(move |h| (w, h))).collect();
    let found: Vec<BTreeSet<Tiling>> = shapes
        .par_iter()
        .map(|&(w, h)| {
            let mut out = BTreeSet::new();
            if w * h >= n {
                let mut grid = vec![false; w * h];
                fill(w, h, n, &mut grid, &mut Vec::new(), &mut out);
            }
            out
        })
        .collect();
    let all: BTreeSet<Tiling> = found.into_iter().flatten().collect();
    let mut classes: BTreeMap<Vec<bool>, Tiling> = BTreeMap::new();
    for t in all {
        classes.entry(double_order_key(&t)).or_insert(t);
    }
    let mut out: Vec<Tiling> = classes.into_values().collect();
    out.sort();
    out
}

/// The least flattening of [`double_order`] over all relabellings of cells.
pub fn double_order_key(t: &Tiling) -> Vec<bool> {
    let (left, above) = double_order(t);
    let n = t.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<bool>> = None;
    loop {
        let mut key = Vec::with_capacity(2 * n * n);
        for m in [&left, &above] {
            for &i in &perm {
                key.extend(perm.iter().map(|&j| m[i][j]));
            }
        }
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_default()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn fill(w: usize, h: usize, n: usize, grid: &mut [bool], placed: &mut Vec<Rect>, out: &mut BTreeSet<Tiling>) {
    let Some(first) = grid.iter().position(|&c| !c) else {
        if placed.len() == n {
            let t = Tiling::from_cells(placed.clone()).expect("grid fill is a tiling");
            out.insert(t.compressed());
        }
        return;
    };
    if placed.len() == n {
        return;
    }
    let (x0, y0) = (first % w, first / w);
    for x1 in x0 + 1..=w {
        if grid[y0 * w + x1 - 1] {
            break;
        }
        for y1 in y0 + 1..=h {
            if (x0..x1).any(|x| grid[(y1 - 1) * w + x]) {
                break;
            }
            for y in y0..y1 {
                for x in x0..x1 {
                    grid[y * w + x] = true;
                }
            }
            placed.push(Rect::ints(x0 as i128, y0 as i128, x1 as i128, y1 as i128));
            fill(w, h, n, grid, placed, out);
            placed.pop();
            for y in y0..y1 {
                for x in x0..x1 {
                    grid[y * w + x] = false;
                }
            }
        }
    }
}

/// The left-of and above relations between cells, as adjacency matrices in
/// cell order. Cell `i` is left of `j` when `i.x1 ≤ j.x0`, above when
/// `i.y1 ≤ j.y0`.
pub fn double_order(t: &Tiling) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let c = t.cells();
    let rel = |f: &dyn Fn(&Rect, &Rect) -> bool| -> Vec<Vec<bool>> { c.iter().map(|a| c.iter().map(|b| f(a, b)).collect()).collect() };
    (rel(&|a, b| a.x1 <= b.x0), rel(&|a, b| a.y1 <= b.y0))
}
