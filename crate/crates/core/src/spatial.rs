//! Uniform grid over workspace positions for nearest-neighbor and range
//! queries under the system metric.
//!
//! The metric is bounded below by `floor * |p - q|` on positions, so a cell
//! whose nearest point is farther than `r / floor` cannot hold a match.

use crate::world::Bounds;

#[derive(Clone, Debug)]
pub struct GridIndex {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
    /// Points outside the grid extent, always scanned.
    overflow: Vec<u32>,
    len: usize,
}

impl GridIndex {
    pub fn new(bounds: &Bounds, cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let nx = ((bounds.width() / cell).ceil() as usize).max(1);
        let ny = ((bounds.height() / cell).ceil() as usize).max(1);
        GridIndex { origin: bounds.min, cell, nx, ny, cells: vec![Vec::new(); nx * ny], overflow: Vec::new(), len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn cell_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let fx = ((p[0] - self.origin[0]) / self.cell).floor();
        let fy = ((p[1] - self.origin[1]) / self.cell).floor();
        if fx >= 0.0 && fy >= 0.0 && (fx as usize) < self.nx && (fy as usize) < self.ny {
            Some((fx as usize, fy as usize))
        } else {
            None
        }
    }

    /// Cell coordinate range covering `[lo, hi]` along one axis, clamped to the grid.
    fn span(&self, lo: f64, hi: f64, axis: usize) -> Option<(usize, usize)> {
        let n = if axis == 0 { self.nx } else { self.ny };
        let a = ((lo - self.origin[axis]) / self.cell).floor();
        let b = ((hi - self.origin[axis]) / self.cell).floor();
        if b < 0.0 || a >= n as f64 {
            return None;
        }
        Some((a.max(0.0) as usize, (b as usize).min(n - 1)))
    }

    pub fn insert(&mut self, id: u32, p: [f64; 2]) {
        match self.cell_of(p) {
            Some((i, j)) => self.cells[j * self.nx + i].push(id),
            None => self.overflow.push(id),
        }
        self.len += 1;
    }

    /// Every id within metric radius `r` of `p`, given `dist(id)` and the
    /// position weight `floor`. Order is unspecified.
    pub fn within(&self, p: [f64; 2], r: f64, floor: f64, mut dist: impl FnMut(u32) -> f64) -> Vec<u32> {
        let mut out = Vec::new();
        let reach = r / floor;
        for &id in &self.overflow {
            if dist(id) <= r {
                out.push(id);
            }
        }
        let (Some((i0, i1)), Some((j0, j1))) = (self.span(p[0] - reach, p[0] + reach, 0), self.span(p[1] - reach, p[1] + reach, 1))
        else {
            return out;
        };
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &id in &self.cells[j * self.nx + i] {
                    if dist(id) <= r {
                        out.push(id);
                    }
                }
            }
        }
        out
    }

    /// The id minimizing `(dist(id), id)`, or `None` when empty.
    pub fn nearest(&self, p: [f64; 2], floor: f64, mut dist: impl FnMut(u32) -> f64) -> Option<u32> {
        let mut best: Option<(f64, u32)> = None;
        let mut consider = |id: u32, best: &mut Option<(f64, u32)>| {
            let d = dist(id);
            if best.map_or(true, |(bd, bid)| d < bd || (d == bd && id < bid)) {
                *best = Some((d, id));
            }
        };
        for &id in &self.overflow {
            consider(id, &mut best);
        }
        // Ring search outward from the clamped home cell.
        let fx = ((p[0] - self.origin[0]) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as i64;
        let fy = ((p[1] - self.origin[1]) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as i64;
        let max_ring = self.nx.max(self.ny) as i64;
        for ring in 0..=max_ring {
            if let Some((bd, _)) = best {
                if ring > 0 && self.ring_gap(p, fx, fy, ring) * floor > bd {
                    break;
                }
            }
            for j in (fy - ring)..=(fy + ring) {
                if j < 0 || j >= self.ny as i64 {
                    continue;
                }
                let on_edge = j == fy - ring || j == fy + ring;
                let step = if on_edge || ring == 0 { 1 } else { (2 * ring) as usize };
                let mut i = fx - ring;
                while i <= fx + ring {
                    if i >= 0 && i < self.nx as i64 {
                        for &id in &self.cells[j as usize * self.nx + i as usize] {
                            consider(id, &mut best);
                        }
                    }
                    i += step as i64;
                }
            }
        }
        best.map(|(_, id)| id)
    }

    /// Lower bound on the position distance from `p` to any cell of Chebyshev
    /// ring `ring` around `(fx, fy)`.
    fn ring_gap(&self, p: [f64; 2], fx: i64, fy: i64, ring: i64) -> f64 {
        let lo_x = self.origin[0] + (fx - ring + 1) as f64 * self.cell;
        let hi_x = self.origin[0] + (fx + ring) as f64 * self.cell;
        let lo_y = self.origin[1] + (fy - ring + 1) as f64 * self.cell;
        let hi_y = self.origin[1] + (fy + ring) as f64 * self.cell;
        // Distance from p to the outside of the box made of rings < `ring`.
        let gx = (p[0] - lo_x).min(hi_x - p[0]);
        let gy = (p[1] - lo_y).min(hi_y - p[1]);
        gx.min(gy).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-2.0f64..12.0, -2.0f64..12.0), 1..120)
    }

    proptest! {
        #[test]
        fn nearest_and_within_match_linear_scan(pts in pts_strategy(), q in (-3.0f64..13.0, -3.0f64..13.0), r in 0.0f64..6.0, cell in 0.3f64..3.0) {
            let bounds = Bounds { min: [0.0, 0.0], max: [10.0, 10.0] };
            let mut grid = GridIndex::new(&bounds, cell);
            for (i, p) in pts.iter().enumerate() {
                grid.insert(i as u32, [p.0, p.1]);
            }
            let dist = |id: u32| { let p = pts[id as usize]; (p.0 - q.0).hypot(p.1 - q.1) };
            let got = grid.nearest([q.0, q.1], 1.0, dist).unwrap();
            let oracle = (0..pts.len() as u32).min_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b))).unwrap();
            prop_assert_eq!(got, oracle);

            let mut w = grid.within([q.0, q.1], r, 1.0, dist);
            w.sort();
            let lin: Vec<u32> = (0..pts.len() as u32).filter(|&i| dist(i) <= r).collect();
            prop_assert_eq!(w, lin);
        }
    }

    #[test]
    fn empty_grid() {
        let grid = GridIndex::new(&Bounds { min: [0.0, 0.0], max: [5.0, 5.0] }, 1.0);
        assert!(grid.nearest([1.0, 1.0], 1.0, |_| 0.0).is_none());
        assert!(grid.within([1.0, 1.0], 3.0, 1.0, |_| 0.0).is_empty());
        assert!(grid.is_empty());
    }
}
