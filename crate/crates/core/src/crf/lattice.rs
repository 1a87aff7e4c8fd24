//! Permutohedral lattice for approximate high-dimensional Gaussian filtering.
//!
//! Points are splatted onto the vertices of the enclosing simplex of the
//! `(d+1)`-dimensional permutohedral lattice, blurred with a `[1/2, 1, 1/2]`
//! stencil along each of the `d+1` lattice axes, and sliced back with the same
//! barycentric weights. Features must already be divided by their standard
//! deviations; the result approximates `sum_j exp(-|f_i - f_j|^2 / 2) v_j`
//! up to a global gain, which [`Lattice::filter`] does not correct.

use std::collections::HashMap;

const MAX_DIM: usize = 8;

type Key = [i32; MAX_DIM];

#[derive(Debug, Clone)]
pub struct Lattice {
    dim: usize,
    num_points: usize,
    num_vertices: usize,
    /// `num_points * (dim + 1)` vertex indices.
    offsets: Vec<u32>,
    /// Barycentric weights parallel to `offsets`.
    weights: Vec<f64>,
    /// For each axis, `(minus, plus)` neighbor of every vertex; `u32::MAX` when absent.
    neighbors: Vec<Vec<(u32, u32)>>,
}

impl Lattice {
    /// Builds the lattice for `features.len() / dim` points.
    pub fn new(features: &[f64], dim: usize) -> Self {
        assert!((1..MAX_DIM).contains(&dim), "lattice dimension {dim} unsupported");
        assert_eq!(features.len() % dim, 0);
        let d = dim;
        let n = features.len() / d;

        // Expected std-dev of the lattice blur, matched to a unit Gaussian.
        let inv_std_dev = (2.0f64 / 3.0).sqrt() * (d as f64 + 1.0);
        let scale: Vec<f64> = (0..d)
            .map(|i| inv_std_dev / (((i + 2) * (i + 1)) as f64).sqrt())
            .collect();

        let mut canonical = vec![0i32; (d + 1) * (d + 1)];
        for i in 0..=d {
            for j in 0..=(d - i) {
                canonical[i * (d + 1) + j] = i as i32;
            }
            for j in (d - i + 1)..=d {
                canonical[i * (d + 1) + j] = i as i32 - (d as i32 + 1);
            }
        }

        let mut table: HashMap<Key, u32> = HashMap::with_capacity(n * (d + 1) / 2);
        let mut keys: Vec<Key> = Vec::new();
        let mut offsets = Vec::with_capacity(n * (d + 1));
        let mut weights = Vec::with_capacity(n * (d + 1));

        let mut elevated = [0.0f64; MAX_DIM + 1];
        let mut rem0 = [0i32; MAX_DIM + 1];
        let mut rank = [0i32; MAX_DIM + 1];
        let mut bary = [0.0f64; MAX_DIM + 2];
        let down = 1.0 / (d as f64 + 1.0);
        let dp1 = d as i32 + 1;

        for f in features.chunks_exact(d) {
            // Embed into the hyperplane x_0 + ... + x_d = 0.
            let mut sm = 0.0;
            for j in (1..=d).rev() {
                let cf = f[j - 1] * scale[j - 1];
                elevated[j] = sm - j as f64 * cf;
                sm += cf;
            }
            elevated[0] = sm;

            // Nearest remainder-0 lattice point.
            let mut sum = 0i32;
            for i in 0..=d {
                let v = down * elevated[i];
                let up = v.ceil() * (d as f64 + 1.0);
                let dn = v.floor() * (d as f64 + 1.0);
                rem0[i] = if up - elevated[i] < elevated[i] - dn {
                    up as i32
                } else {
                    dn as i32
                };
                sum += rem0[i];
            }
            sum /= dp1;

            // Ordering of the residual identifies the enclosing simplex.
            rank[..=d].iter_mut().for_each(|r| *r = 0);
            for i in 0..d {
                let di = elevated[i] - rem0[i] as f64;
                for j in (i + 1)..=d {
                    if di < elevated[j] - rem0[j] as f64 {
                        rank[i] += 1;
                    } else {
                        rank[j] += 1;
                    }
                }
            }
            for i in 0..=d {
                rank[i] += sum;
                if rank[i] < 0 {
                    rank[i] += dp1;
                    rem0[i] += dp1;
                } else if rank[i] > d as i32 {
                    rank[i] -= dp1;
                    rem0[i] -= dp1;
                }
            }

            bary[..=d + 1].iter_mut().for_each(|b| *b = 0.0);
            for i in 0..=d {
                let v = (elevated[i] - rem0[i] as f64) * down;
                let r = rank[i] as usize;
                bary[d - r] += v;
                bary[d - r + 1] -= v;
            }
            bary[0] += 1.0 + bary[d + 1];

            for remainder in 0..=d {
                let mut key: Key = [0; MAX_DIM];
                for i in 0..d {
                    key[i] = rem0[i] + canonical[remainder * (d + 1) + rank[i] as usize];
                }
                let next = keys.len() as u32;
                let idx = *table.entry(key).or_insert_with(|| {
                    keys.push(key);
                    next
                });
                offsets.push(idx);
                weights.push(bary[remainder]);
            }
        }

        let m = keys.len();
        let mut neighbors = Vec::with_capacity(d + 1);
        for axis in 0..=d {
            let mut axis_nb = Vec::with_capacity(m);
            for key in &keys {
                let mut n1: Key = [0; MAX_DIM];
                let mut n2: Key = [0; MAX_DIM];
                for k in 0..d {
                    n1[k] = key[k] + 1;
                    n2[k] = key[k] - 1;
                }
                if axis < d {
                    n1[axis] = key[axis] - d as i32;
                    n2[axis] = key[axis] + d as i32;
                }
                let a = table.get(&n1).copied().unwrap_or(u32::MAX);
                let b = table.get(&n2).copied().unwrap_or(u32::MAX);
                axis_nb.push((a, b));
            }
            neighbors.push(axis_nb);
        }

        Self {
            dim: d,
            num_points: n,
            num_vertices: m,
            offsets,
            weights,
            neighbors,
        }
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Filters `values` (`num_points x channels`, point-major) into `out`.
    pub fn filter(&self, values: &[f64], channels: usize, out: &mut [f64]) {
        let d = self.dim;
        let c = channels;
        assert_eq!(values.len(), self.num_points * c);
        assert_eq!(out.len(), self.num_points * c);

        // One spare slot at the end stands in for absent neighbors.
        let pad = self.num_vertices;
        let mut grid = vec![0.0f64; (self.num_vertices + 1) * c];
        for (p, v) in values.chunks_exact(c).enumerate() {
            for r in 0..=d {
                let o = self.offsets[p * (d + 1) + r] as usize;
                let w = self.weights[p * (d + 1) + r];
                for k in 0..c {
                    grid[o * c + k] += w * v[k];
                }
            }
        }

        let mut next = vec![0.0f64; grid.len()];
        for axis_nb in &self.neighbors {
            for (i, &(a, b)) in axis_nb.iter().enumerate() {
                let a = if a == u32::MAX { pad } else { a as usize };
                let b = if b == u32::MAX { pad } else { b as usize };
                for k in 0..c {
                    next[i * c + k] = grid[i * c + k] + 0.5 * (grid[a * c + k] + grid[b * c + k]);
                }
            }
            std::mem::swap(&mut grid, &mut next);
        }

        let alpha = 1.0 / (1.0 + 2f64.powi(-(d as i32)));
        for (p, o) in out.chunks_exact_mut(c).enumerate() {
            o.iter_mut().for_each(|x| *x = 0.0);
            for r in 0..=d {
                let v = self.offsets[p * (d + 1) + r] as usize;
                let w = self.weights[p * (d + 1) + r] * alpha;
                for k in 0..c {
                    o[k] += w * grid[v * c + k];
                }
            }
        }
    }
}
