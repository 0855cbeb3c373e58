use std::collections::HashMap;

/// Uniform hash grid over `f64` approximations of points.
///
/// With a cell size at least the largest query radius, every point within
/// that radius of a stored center lies in the center's cell or one of its
/// `3^d - 1` neighbours.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell: f64,
    dim: usize,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl SpatialGrid {
    pub fn new(dim: usize, cell: f64) -> Self {
        assert!(cell.is_finite() && cell > 0.0, "grid cell size must be positive");
        SpatialGrid { cell, dim, buckets: HashMap::new() }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|x| (x / self.cell).floor() as i64).collect()
    }

    pub fn insert(&mut self, index: usize, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(index);
    }

    /// Indices stored in the cell of `p` and its neighbours, ascending.
    pub fn candidates(&self, p: &[f64]) -> Vec<usize> {
        let base = self.key(p);
        let mut out = Vec::new();
        let mut offset = vec![-1i64; self.dim];
        loop {
            let k: Vec<i64> = base.iter().zip(&offset).map(|(a, b)| a + b).collect();
            if let Some(v) = self.buckets.get(&k) {
                out.extend_from_slice(v);
            }
            // odometer over {-1, 0, 1}^d
            let mut i = 0;
            while i < self.dim {
                offset[i] += 1;
                if offset[i] <= 1 {
                    break;
                }
                offset[i] = -1;
                i += 1;
            }
            if i == self.dim {
                break;
            }
        }
        out.sort_unstable();
        out
    }

    pub fn len(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbours_are_found_across_cell_edges() {
        let mut g = SpatialGrid::new(2, 0.1);
        g.insert(0, &[0.099, 0.5]);
        g.insert(1, &[0.5, 0.5]);
        assert_eq!(g.candidates(&[0.101, 0.5]), vec![0]);
        assert!(g.candidates(&[0.3, 0.5]).is_empty());
        assert_eq!(g.len(), 2);
    }
}
