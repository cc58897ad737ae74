//! Periodic hypercubic lattice geometry and the conjugate momentum grid.
//!
//! Sites of the L^d torus are enumerated row-major over coordinate tuples in
//! {0..L-1}^d. Momenta live on the dual grid {2 Pi n / L : n in {0..L-1}}^d
//! and are enumerated with the same row-major flat index, so a flat index
//! names a site and a momentum interchangeably. The lattice constant is 1.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::DeclabError;
use crate::Result;

/// A d-dimensional periodic hypercubic lattice of linear size L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    dimension: usize,
    linear_size: usize,
    volume: usize,
}

impl LatticeSpec {
    pub fn new(dimension: usize, linear_size: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(DeclabError::InvalidParameter {
                reason: "lattice dimension must be positive".into(),
            });
        }
        if linear_size == 0 {
            return Err(DeclabError::InvalidParameter {
                reason: "lattice linear size must be positive".into(),
            });
        }
        let volume = linear_size
            .checked_pow(dimension as u32)
            .ok_or(DeclabError::InvalidParameter {
                reason: "lattice volume overflows usize".into(),
            })?;
        Ok(Self {
            dimension,
            linear_size,
            volume,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn linear_size(&self) -> usize {
        self.linear_size
    }

    /// Number of sites |Lambda| = L^d.
    pub fn volume(&self) -> usize {
        self.volume
    }

    /// Coordinates of the site with the given row-major flat index.
    pub fn site_coords(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.volume);
        let mut coords = vec![0; self.dimension];
        let mut rem = index;
        for i in (0..self.dimension).rev() {
            coords[i] = rem % self.linear_size;
            rem /= self.linear_size;
        }
        coords
    }

    /// Row-major flat index of a coordinate tuple (components taken mod L).
    pub fn site_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dimension);
        coords
            .iter()
            .fold(0, |acc, &c| acc * self.linear_size + (c % self.linear_size))
    }

    /// All sites in enumeration order.
    pub fn sites(&self) -> Vec<Vec<usize>> {
        (0..self.volume).map(|i| self.site_coords(i)).collect()
    }

    /// Flat index of the site one step along `direction`, with periodic wrap.
    pub fn neighbor(&self, site: usize, direction: usize) -> usize {
        debug_assert!(direction < self.dimension);
        let mut coords = self.site_coords(site);
        coords[direction] = (coords[direction] + 1) % self.linear_size;
        self.site_index(&coords)
    }

    /// Nearest-neighbor bonds as (site, neighbor) flat-index pairs, one bond
    /// per (site, direction). On L = 2 each geometric pair appears twice
    /// because +1 and -1 wrap to the same neighbor; the literal enumeration
    /// is kept.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.volume * self.dimension);
        for site in 0..self.volume {
            for dir in 0..self.dimension {
                out.push((site, self.neighbor(site, dir)));
            }
        }
        out
    }

    /// Flat index of the site translated by `shift` (componentwise mod L).
    pub fn translate_site(&self, site: usize, shift: &[usize]) -> usize {
        debug_assert_eq!(shift.len(), self.dimension);
        let coords = self.site_coords(site);
        let moved: Vec<usize> = coords
            .iter()
            .zip(shift)
            .map(|(&c, &s)| (c + s) % self.linear_size)
            .collect();
        self.site_index(&moved)
    }

    /// Momentum values (2 Pi n_i / L components) for a flat grid index.
    pub fn momentum_values(&self, index: usize) -> Vec<f64> {
        self.site_coords(index)
            .into_iter()
            .map(|n| TAU * n as f64 / self.linear_size as f64)
            .collect()
    }

    /// Flat grid index of -k for the momentum with flat index `index`.
    pub fn negate_momentum(&self, index: usize) -> usize {
        let coords = self.site_coords(index);
        let negated: Vec<usize> = coords
            .iter()
            .map(|&n| (self.linear_size - n) % self.linear_size)
            .collect();
        self.site_index(&negated)
    }

    /// Flat grid index closest to the given momentum components, or an error
    /// if any component is off the 2 Pi n / L grid.
    pub fn momentum_index(&self, momentum: &[f64]) -> Result<usize> {
        if momentum.len() != self.dimension {
            return Err(DeclabError::OffGrid {
                momentum: momentum.to_vec(),
                linear_size: self.linear_size,
            });
        }
        let mut indices = Vec::with_capacity(self.dimension);
        for &k in momentum {
            let n = k * self.linear_size as f64 / TAU;
            let rounded = n.round();
            if (n - rounded).abs() > 1e-9 {
                return Err(DeclabError::OffGrid {
                    momentum: momentum.to_vec(),
                    linear_size: self.linear_size,
                });
            }
            let idx = (rounded as i64).rem_euclid(self.linear_size as i64) as usize;
            indices.push(idx);
        }
        Ok(self.site_index(&indices))
    }

    /// e^{+i k.x} for flat momentum index `k` and flat site index `x`.
    ///
    /// This is the a_k sign convention; environment operators b_k use the
    /// conjugate phase.
    pub fn phase(&self, k: usize, x: usize) -> Complex64 {
        let n = self.site_coords(k);
        let coords = self.site_coords(x);
        // n.x can be reduced mod L componentwise before the product
        let dot: usize = n
            .iter()
            .zip(&coords)
            .map(|(&ni, &xi)| (ni * xi) % self.linear_size)
            .sum();
        let angle = TAU * dot as f64 / self.linear_size as f64;
        Complex64::from_polar(1.0, angle)
    }

    /// Euclidean distance between two sites under the minimum-image rule.
    pub fn min_image_distance(&self, x: usize, y: usize) -> f64 {
        let cx = self.site_coords(x);
        let cy = self.site_coords(y);
        let l = self.linear_size as isize;
        let sq: f64 = cx
            .iter()
            .zip(&cy)
            .map(|(&a, &b)| {
                let raw = (a as isize - b as isize).rem_euclid(l);
                let wrapped = raw.min(l - raw) as f64;
                wrapped * wrapped
            })
            .sum();
        sq.sqrt()
    }

    /// Largest linear size whose q^(L^d) Hilbert dimension stays within `cap`.
    pub fn max_feasible_linear_size(dimension: usize, local_dim: usize, cap: usize) -> usize {
        let mut best = 0;
        for l in 1..=cap {
            let volume = (l as u128).pow(dimension as u32);
            let mut dim: u128 = 1;
            let mut ok = true;
            for _ in 0..volume {
                dim = dim.saturating_mul(local_dim as u128);
                if dim > cap as u128 {
                    ok = false;
                    break;
                }
            }
            if ok {
                best = l;
            } else {
                break;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn enumerates_every_coordinate_once() {
        let lat = LatticeSpec::new(2, 3).unwrap();
        assert_eq!(lat.volume(), 9);
        let sites = lat.sites();
        assert_eq!(sites.len(), 9);
        for (i, s) in sites.iter().enumerate() {
            assert_eq!(lat.site_index(s), i);
        }
        // row-major: second coordinate varies fastest
        assert_eq!(sites[0], vec![0, 0]);
        assert_eq!(sites[1], vec![0, 1]);
        assert_eq!(sites[3], vec![1, 0]);
    }

    #[test]
    fn periodic_neighbors_always_defined() {
        let lat = LatticeSpec::new(1, 4).unwrap();
        assert_eq!(lat.neighbor(3, 0), 0);
        let lat2 = LatticeSpec::new(2, 2).unwrap();
        for s in 0..4 {
            for dir in 0..2 {
                let n = lat2.neighbor(s, dir);
                assert!(n < 4);
            }
        }
    }

    #[test]
    fn momentum_grid_matches_2pi_n_over_l() {
        let lat = LatticeSpec::new(1, 4).unwrap();
        for n in 0..4 {
            let k = lat.momentum_values(n);
            assert_abs_diff_eq!(k[0], TAU * n as f64 / 4.0, epsilon = 1e-15);
            assert_eq!(lat.momentum_index(&k).unwrap(), n);
        }
        assert!(lat.momentum_index(&[0.1]).is_err());
    }

    #[test]
    fn negate_momentum_is_involution() {
        let lat = LatticeSpec::new(2, 3).unwrap();
        for k in 0..lat.volume() {
            assert_eq!(lat.negate_momentum(lat.negate_momentum(k)), k);
        }
        assert_eq!(lat.negate_momentum(0), 0);
    }

    #[test]
    fn phases_are_characters() {
        // e^{ik.(x+y)} = e^{ik.x} e^{ik.y} with the wrapped sum
        let lat = LatticeSpec::new(1, 6).unwrap();
        for k in 0..6 {
            for x in 0..6 {
                for y in 0..6 {
                    let xy = lat.translate_site(x, &[y]);
                    let lhs = lat.phase(k, xy);
                    let rhs = lat.phase(k, x) * lat.phase(k, y);
                    assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn min_image_wraps() {
        let lat = LatticeSpec::new(1, 8).unwrap();
        assert_abs_diff_eq!(lat.min_image_distance(0, 7), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lat.min_image_distance(0, 4), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn feasible_size_for_spins() {
        assert_eq!(LatticeSpec::max_feasible_linear_size(1, 2, 1 << 14), 14);
        assert_eq!(LatticeSpec::max_feasible_linear_size(2, 2, 1 << 14), 3);
    }
}
