use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use crate::weights::WeightGrid;
use lfpp_field::{FieldError, Rect, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    LeftRight,
    TopBottom,
}

/// Rule for equal-length alternatives: settle and prefer predecessors by
/// ascending (`Lexicographic`) or descending (`Reversed`) row-major node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    Lexicographic,
    Reversed,
}

#[derive(Debug, Clone)]
pub struct CrossingResult {
    pub rect: Rect,
    pub orientation: Orientation,
    pub length: f64,
    /// Grid indices `(i, j)` from the source side to the target side.
    pub geodesic: Vec<(u32, u32)>,
}

impl CrossingResult {
    /// Geodesic as plane coordinates.
    pub fn polyline(&self, wg: &WeightGrid) -> Vec<(f64, f64)> {
        self.geodesic.iter().map(|&(i, j)| wg.grid.position(i as usize, j as usize)).collect()
    }
}

const DIRS: [(i32, i32); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Trapezoid edge weight between neighbouring nodes.
#[inline]
fn edge(wg: &WeightGrid, a: usize, b: usize, diag: bool) -> f64 {
    let len = if diag { SQRT_2 * wg.h() } else { wg.h() };
    len * (wg.weights[a] + wg.weights[b]) * 0.5
}

/// Dijkstra on the sub-grid `[i0, i1] x [j0, j1]` with several sources.
struct Search<'a> {
    wg: &'a WeightGrid,
    i0: usize,
    j0: usize,
    snx: usize,
    sny: usize,
    tie: TieBreak,
    dist: Vec<f64>,
    pred: Vec<u32>,
    done: Vec<bool>,
}

const NONE: u32 = u32::MAX;

impl<'a> Search<'a> {
    fn new(wg: &'a WeightGrid, (i0, i1, j0, j1): (usize, usize, usize, usize), tie: TieBreak) -> Self {
        let (snx, sny) = (i1 - i0 + 1, j1 - j0 + 1);
        let n = snx * sny;
        Search { wg, i0, j0, snx, sny, tie, dist: vec![f64::INFINITY; n], pred: vec![NONE; n], done: vec![false; n] }
    }

    #[inline]
    fn global(&self, s: usize) -> usize {
        let (si, sj) = (s % self.snx, s / self.snx);
        (self.j0 + sj) * self.wg.nx() + self.i0 + si
    }

    #[inline]
    fn rank(&self, s: u32) -> u32 {
        match self.tie {
            TieBreak::Lexicographic => s,
            TieBreak::Reversed => u32::MAX - 1 - s,
        }
    }

    /// Runs until `stop` returns true for a settled node (returned) or the heap empties.
    fn run<F: FnMut(u32) -> bool>(&mut self, sources: &[u32], mut stop: F) -> Option<u32> {
        let mut heap = BinaryHeap::new();
        for &s in sources {
            self.dist[s as usize] = 0.0;
            heap.push(Reverse((0u64, self.rank(s))));
        }
        while let Some(Reverse((dbits, r))) = heap.pop() {
            let u = match self.tie {
                TieBreak::Lexicographic => r,
                TieBreak::Reversed => u32::MAX - 1 - r,
            };
            let ui = u as usize;
            if self.done[ui] || f64::from_bits(dbits) > self.dist[ui] {
                continue;
            }
            self.done[ui] = true;
            if stop(u) {
                return Some(u);
            }
            let du = self.dist[ui];
            let gu = self.global(ui);
            let (ux, uy) = ((ui % self.snx) as i32, (ui / self.snx) as i32);
            for &(dx, dy) in &DIRS {
                let (vx, vy) = (ux + dx, uy + dy);
                if vx < 0 || vy < 0 || vx >= self.snx as i32 || vy >= self.sny as i32 {
                    continue;
                }
                let vi = vy as usize * self.snx + vx as usize;
                if self.done[vi] {
                    continue;
                }
                let gv = self.global(vi);
                let nd = du + edge(self.wg, gu, gv, dx != 0 && dy != 0);
                let better = nd < self.dist[vi]
                    || (nd == self.dist[vi] && self.pred[vi] != NONE && self.rank(u) < self.rank(self.pred[vi]));
                if better {
                    if nd < self.dist[vi] {
                        heap.push(Reverse((nd.to_bits(), self.rank(vi as u32))));
                    }
                    self.dist[vi] = nd;
                    self.pred[vi] = u;
                }
            }
        }
        None
    }

    fn path_to(&self, t: u32) -> Vec<(u32, u32)> {
        let mut path = Vec::new();
        let mut c = t;
        loop {
            let ci = c as usize;
            path.push(((self.i0 + ci % self.snx) as u32, (self.j0 + ci / self.snx) as u32));
            let p = self.pred[ci];
            if p == NONE {
                break;
            }
            c = p;
        }
        path.reverse();
        path
    }
}

/// Shortest crossing of `rect` between two opposite sides (all side nodes are
/// sources and targets).
pub fn crossing(wg: &WeightGrid, rect: &Rect, orientation: Orientation) -> Result<CrossingResult> {
    crossing_with(wg, rect, orientation, TieBreak::Lexicographic)
}

pub fn crossing_with(wg: &WeightGrid, rect: &Rect, orientation: Orientation, tie: TieBreak) -> Result<CrossingResult> {
    let ir = wg.index_rect(rect)?;
    let mut s = Search::new(wg, ir, tie);
    let (snx, sny) = (s.snx, s.sny);
    let (sources, on_target): (Vec<u32>, Box<dyn Fn(u32) -> bool>) = match orientation {
        Orientation::LeftRight => (
            (0..sny).map(|j| (j * snx) as u32).collect(),
            Box::new(move |u| u as usize % snx == snx - 1),
        ),
        Orientation::TopBottom => (
            (0..snx).map(|i| i as u32).collect(),
            Box::new(move |u| u as usize / snx == sny - 1),
        ),
    };
    let t = s.run(&sources, |u| on_target(u)).ok_or_else(|| FieldError::Domain("crossing search found no path".into()))?;
    Ok(CrossingResult { rect: *rect, orientation, length: s.dist[t as usize], geodesic: s.path_to(t) })
}

/// Sum of edge weights along a path of grid indices, accumulated from the start.
pub fn path_length(wg: &WeightGrid, path: &[(u32, u32)]) -> Result<f64> {
    let nx = wg.nx();
    let mut total = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (dx, dy) = (a.0.abs_diff(b.0), a.1.abs_diff(b.1));
        if dx > 1 || dy > 1 || dx + dy == 0 {
            return Err(FieldError::Domain(format!("nodes {a:?} and {b:?} are not neighbours")));
        }
        let ga = a.1 as usize * nx + a.0 as usize;
        let gb = b.1 as usize * nx + b.0 as usize;
        total += edge(wg, ga, gb, dx == 1 && dy == 1);
    }
    Ok(total)
}

/// Distances from one point to several points over the whole grid.
pub fn distances_from(wg: &WeightGrid, x: (f64, f64), targets: &[(f64, f64)]) -> Vec<f64> {
    let full = (0, wg.nx() - 1, 0, wg.ny() - 1);
    let mut s = Search::new(wg, full, TieBreak::Lexicographic);
    let nx = wg.nx();
    let idx = |p: (f64, f64)| {
        let (i, j) = wg.grid.nearest(p.0, p.1);
        (j * nx + i) as u32
    };
    let src = idx(x);
    let tg: Vec<u32> = targets.iter().map(|&p| idx(p)).collect();
    let mut remaining: std::collections::BTreeSet<u32> = tg.iter().copied().collect();
    s.run(&[src], |u| {
        remaining.remove(&u);
        remaining.is_empty()
    });
    tg.iter().map(|&t| s.dist[t as usize]).collect()
}

/// Shortest-path distance between the grid nodes nearest to `x` and `y`.
pub fn point_distance(wg: &WeightGrid, x: (f64, f64), y: (f64, f64)) -> f64 {
    distances_from(wg, x, &[y])[0]
}

/// Full single-source distance map from a grid node.
pub(crate) fn distance_map(wg: &WeightGrid, src: (usize, usize)) -> Vec<f64> {
    let full = (0, wg.nx() - 1, 0, wg.ny() - 1);
    let mut s = Search::new(wg, full, TieBreak::Lexicographic);
    s.run(&[(src.1 * wg.nx() + src.0) as u32], |_| false);
    s.dist
}
