//! Zonotope algebra: linear maps, Minkowski sums, Cartesian products,
//! Girard order reduction, and the exact planar membership test used to
//! score estimation runs.
//!
//! A zonotope `<c, G>` is the set `{ c + G beta : ||beta||_inf <= 1 }`.
//! All operations are pure; values are immutable once constructed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Centrally symmetric convex set represented by a center and a
/// generator matrix with one column per generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    center: DVector<f64>,
    generators: DMatrix<f64>,
}

/// Axis-aligned box given by elementwise bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox {
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl IntervalBox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch(format!(
                "interval bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::InvalidParameter(
                "interval lower bound exceeds upper bound".into(),
            ));
        }
        Ok(Self { lower, upper })
    }
}

impl Zonotope {
    /// Builds a zonotope, rejecting shape mismatches and non-finite entries.
    pub fn new(center: DVector<f64>, generators: DMatrix<f64>) -> Result<Self> {
        if generators.nrows() != center.len() {
            return Err(Error::DimensionMismatch(format!(
                "center has dimension {} but generators have {} rows",
                center.len(),
                generators.nrows()
            )));
        }
        if !center.iter().all(|x| x.is_finite()) || !generators.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("zonotope center or generators".into()));
        }
        Ok(Self { center, generators })
    }

    /// A degenerate zonotope containing exactly one point.
    pub fn point(center: DVector<f64>) -> Result<Self> {
        let n = center.len();
        Self::new(center, DMatrix::zeros(n, 0))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Number of generators (columns of the generator matrix).
    pub fn order(&self) -> usize {
        self.generators.ncols()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    /// Image under the linear map `M`: `<M c, M G>`.
    pub fn linear_map(&self, m: &DMatrix<f64>) -> Result<Zonotope> {
        if m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "map has {} columns but zonotope has dimension {}",
                m.ncols(),
                self.dim()
            )));
        }
        Zonotope::new(m * &self.center, m * &self.generators)
    }

    /// Minkowski sum: centers add, generator matrices concatenate.
    pub fn minkowski_sum(&self, other: &Zonotope) -> Result<Zonotope> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "minkowski sum of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let mut generators = DMatrix::zeros(self.dim(), self.order() + other.order());
        generators
            .view_mut((0, 0), (self.dim(), self.order()))
            .copy_from(&self.generators);
        generators
            .view_mut((0, self.order()), (self.dim(), other.order()))
            .copy_from(&other.generators);
        Zonotope::new(&self.center + &other.center, generators)
    }

    /// Cartesian product: stacked centers, block-diagonal generators.
    pub fn cartesian_product(&self, other: &Zonotope) -> Zonotope {
        let (n, m) = (self.dim(), other.dim());
        let mut center = DVector::zeros(n + m);
        center.rows_mut(0, n).copy_from(&self.center);
        center.rows_mut(n, m).copy_from(&other.center);

        let mut generators = DMatrix::zeros(n + m, self.order() + other.order());
        generators
            .view_mut((0, 0), (n, self.order()))
            .copy_from(&self.generators);
        generators
            .view_mut((n, self.order()), (m, other.order()))
            .copy_from(&other.generators);
        Zonotope { center, generators }
    }

    /// Tight axis-aligned bounding box: `c +- sum_i |g_i|` per dimension.
    pub fn interval_hull(&self) -> IntervalBox {
        let radius = self.generator_row_abs_sums();
        IntervalBox {
            lower: &self.center - &radius,
            upper: &self.center + &radius,
        }
    }

    fn generator_row_abs_sums(&self) -> DVector<f64> {
        let mut radius = DVector::zeros(self.dim());
        for col in self.generators.column_iter() {
            for (r, v) in radius.iter_mut().zip(col.iter()) {
                *r += v.abs();
            }
        }
        radius
    }

    /// Girard order reduction to at most `q * n` generators.
    ///
    /// Generators are ranked by `||g||_1 - ||g||_inf` (ties broken by
    /// original column index); the least significant ones are collapsed
    /// into their interval hull, a diagonal block of per-dimension
    /// absolute column sums. The result contains the input.
    pub fn reduce_order(&self, q: usize) -> Result<Zonotope> {
        if q < 1 {
            return Err(Error::InvalidParameter(
                "reduction order q must be at least 1".into(),
            ));
        }
        let n = self.dim();
        let gamma = self.order();
        if gamma <= q * n {
            return Ok(self.clone());
        }

        let mut ranked: Vec<usize> = (0..gamma).collect();
        let score = |j: usize| {
            let col = self.generators.column(j);
            let l1: f64 = col.iter().map(|v| v.abs()).sum();
            let linf: f64 = col.iter().fold(0.0, |acc, v| acc.max(v.abs()));
            l1 - linf
        };
        ranked.sort_by(|&a, &b| score(a).partial_cmp(&score(b)).unwrap().then(a.cmp(&b)));

        let n_reduce = gamma - n * (q - 1);
        let (reduced, kept) = ranked.split_at(n_reduce);

        let mut generators = DMatrix::zeros(n, kept.len() + n);
        for (out, &j) in kept.iter().enumerate() {
            generators.column_mut(out).copy_from(&self.generators.column(j));
        }
        for &j in reduced {
            for i in 0..n {
                generators[(i, kept.len() + i)] += self.generators[(i, j)].abs();
            }
        }
        Zonotope::new(self.center.clone(), generators)
    }

    /// Exact planar membership test via support functions.
    ///
    /// Checks `u^T (x - c) <= sum_i |u^T g_i| + tol` over the facet
    /// normals (perpendiculars of the generators) plus the generator
    /// directions themselves, which keeps the test exact when the
    /// generators are rank deficient. Axis directions cover the
    /// degenerate point case.
    pub fn contains_point(&self, x: &DVector<f64>) -> Result<bool> {
        if self.dim() != 2 || x.len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "containment test is planar only; got dimensions {} and {}",
                self.dim(),
                x.len()
            )));
        }

        let scale = 1f64
            .max(self.center.amax() + self.generators.column_iter().map(|g| g.amax()).sum::<f64>());
        let tol = 1e-9 * scale;

        let mut directions: Vec<[f64; 2]> = Vec::with_capacity(2 * self.order() + 2);
        for g in self.generators.column_iter() {
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            if norm == 0.0 {
                continue;
            }
            directions.push([-g[1] / norm, g[0] / norm]);
            directions.push([g[0] / norm, g[1] / norm]);
        }
        if directions.is_empty() {
            directions.push([1.0, 0.0]);
            directions.push([0.0, 1.0]);
        }

        let dx = x - &self.center;
        for u in &directions {
            for sign in [1.0, -1.0] {
                let proj = sign * (u[0] * dx[0] + u[1] * dx[1]);
                let support: f64 = self
                    .generators
                    .column_iter()
                    .map(|g| (u[0] * g[0] + u[1] * g[1]).abs())
                    .sum();
                if proj > support + tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Draws `c + G beta` with `beta` uniform on `[-1, 1]^gamma`.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let beta = DVector::from_fn(self.order(), |_, _| rng.random_range(-1.0..=1.0));
        &self.center + &self.generators * beta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn zono(center: &[f64], cols: &[&[f64]]) -> Zonotope {
        let n = center.len();
        let gens = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        Zonotope::new(DVector::from_column_slice(center), gens).unwrap()
    }

    #[test]
    fn linear_map_scales_center_and_generators() {
        let z = zono(&[1.0, 1.0], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let m = DMatrix::from_diagonal_element(2, 2, 2.0);
        let out = z.linear_map(&m).unwrap();
        assert_eq!(out.center(), &DVector::from_column_slice(&[2.0, 2.0]));
        assert_eq!(out.generators(), &DMatrix::from_diagonal_element(2, 2, 2.0));
        assert_eq!(out.order(), z.order());
    }

    #[test]
    fn linear_map_identity_is_noop() {
        let z = zono(&[3.0, -1.0], &[&[1.0, 2.0], &[0.5, 0.0]]);
        let out = z.linear_map(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(&out, &z);
    }

    #[test]
    fn linear_map_projects_and_contains_samples() {
        let z = zono(&[3.0, 4.0], &[&[1.0, 0.0], &[0.0, 2.0]]);
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let out = z.linear_map(&m).unwrap();
        assert_eq!(out.center(), &DVector::from_column_slice(&[3.0]));
        assert_eq!(out.generators(), &DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));

        // every mapped sample lands in the 1-D image
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let radius: f64 = out.generators().iter().map(|v| v.abs()).sum();
        for _ in 0..1000 {
            let p = z.sample_point(&mut rng);
            let mapped = &m * p;
            assert!((mapped[0] - out.center()[0]).abs() <= radius + 1e-12);
        }
    }

    #[test]
    fn linear_map_rejects_mismatched_columns() {
        let z = zono(&[0.0, 0.0], &[&[1.0, 0.0]]);
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        assert!(matches!(
            z.linear_map(&m),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn minkowski_sum_concatenates() {
        let a = zono(&[1.0], &[&[2.0]]);
        let b = zono(&[-1.0], &[&[3.0]]);
        let s = a.minkowski_sum(&b).unwrap();
        assert_eq!(s.center(), &DVector::from_column_slice(&[0.0]));
        assert_eq!(s.generators(), &DMatrix::from_row_slice(1, 2, &[2.0, 3.0]));
    }

    #[test]
    fn minkowski_sum_with_point_is_translation_identity() {
        let z = zono(&[1.0, 1.0], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let origin = Zonotope::point(DVector::zeros(2)).unwrap();
        let s = z.minkowski_sum(&origin).unwrap();
        assert_eq!(&s, &z);
    }

    #[test]
    fn minkowski_sum_two_boxes() {
        let a = zono(&[1.0, 1.0], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = zono(&[0.0, 0.0], &[&[0.5, 0.0], &[0.0, 0.5]]);
        let s = a.minkowski_sum(&b).unwrap();
        assert_eq!(s.center(), &DVector::from_column_slice(&[1.0, 1.0]));
        let expected =
            DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.5]);
        assert_eq!(s.generators(), &expected);
    }

    #[test]
    fn minkowski_sum_rejects_dimension_mismatch() {
        let a = zono(&[1.0], &[&[2.0]]);
        let b = zono(&[0.0, 0.0], &[]);
        assert!(a.minkowski_sum(&b).is_err());
    }

    #[test]
    fn cartesian_product_blocks() {
        let a = zono(&[1.0], &[&[2.0]]);
        let b = zono(&[3.0], &[&[4.0]]);
        let p = a.cartesian_product(&b);
        assert_eq!(p.center(), &DVector::from_column_slice(&[1.0, 3.0]));
        assert_eq!(
            p.generators(),
            &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0])
        );
    }

    #[test]
    fn cartesian_product_of_points() {
        let a = Zonotope::point(DVector::from_column_slice(&[1.0, 2.0])).unwrap();
        let b = Zonotope::point(DVector::from_column_slice(&[3.0])).unwrap();
        let p = a.cartesian_product(&b);
        assert_eq!(p.center(), &DVector::from_column_slice(&[1.0, 2.0, 3.0]));
        assert_eq!(p.order(), 0);
    }

    #[test]
    fn cartesian_product_adds_dimensions() {
        let a = zono(&[0.0, 0.0], &[&[1.0, 0.0]]);
        let b = zono(&[0.0, 0.0, 0.0], &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(a.cartesian_product(&b).dim(), 5);
    }

    #[test]
    fn reduce_order_noop_when_small() {
        let z = zono(&[0.0, 0.0], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = z.reduce_order(1).unwrap();
        assert_eq!(&r, &z);
    }

    #[test]
    fn reduce_order_collapses_to_interval_hull() {
        let z = zono(&[0.0, 0.0], &[&[1.0, 0.0], &[0.0, 1.0], &[0.1, 0.05]]);
        let r = z.reduce_order(1).unwrap();
        assert_eq!(r.order(), 2);
        let expected = DMatrix::from_row_slice(2, 2, &[1.1, 0.0, 0.0, 1.05]);
        assert_relative_eq!(r.generators(), &expected, epsilon = 1e-12);
    }

    #[test]
    fn reduce_order_rejects_zero_q() {
        let z = zono(&[0.0, 0.0], &[&[1.0, 0.0]]);
        assert!(z.reduce_order(0).is_err());
    }

    #[test]
    fn reduce_order_contains_input_samples() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let gens = DMatrix::from_fn(2, 9, |_, _| rng.random_range(-1.0..=1.0));
        let z = Zonotope::new(DVector::from_column_slice(&[0.3, -0.2]), gens).unwrap();
        let r = z.reduce_order(2).unwrap();
        assert_eq!(r.order(), 4);
        for _ in 0..1000 {
            let p = z.sample_point(&mut rng);
            assert!(r.contains_point(&p).unwrap());
        }
    }

    #[test]
    fn contains_center_and_vertex() {
        let z = zono(&[1.0, -2.0], &[&[1.0, 0.3], &[-0.2, 0.8]]);
        assert!(z.contains_point(z.center()).unwrap());
        let vertex = z.center()
            + z.generators() * DVector::from_column_slice(&[1.0, 1.0]);
        assert!(z.contains_point(&vertex).unwrap());
    }

    #[test]
    fn rejects_point_just_outside_unit_box() {
        let z = zono(&[0.0, 0.0], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let x = DVector::from_column_slice(&[1.001, 1.001]);
        assert!(!z.contains_point(&x).unwrap());
    }

    #[test]
    fn contains_point_handles_degenerate_segment() {
        // rank-1 zonotope: the segment from (-1,0) to (1,0)
        let z = zono(&[0.0, 0.0], &[&[1.0, 0.0]]);
        assert!(z.contains_point(&DVector::from_column_slice(&[0.5, 0.0])).unwrap());
        assert!(!z.contains_point(&DVector::from_column_slice(&[5.0, 0.0])).unwrap());
        assert!(!z.contains_point(&DVector::from_column_slice(&[0.0, 0.1])).unwrap());
    }

    #[test]
    fn contains_point_point_case_uses_axes() {
        let z = Zonotope::point(DVector::from_column_slice(&[2.0, 3.0])).unwrap();
        assert!(z.contains_point(&DVector::from_column_slice(&[2.0, 3.0])).unwrap());
        assert!(!z.contains_point(&DVector::from_column_slice(&[2.1, 3.0])).unwrap());
    }

    #[test]
    fn contains_point_rejects_other_dimensions() {
        let z = zono(&[0.0, 0.0, 0.0], &[&[1.0, 0.0, 0.0]]);
        assert!(z.contains_point(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn sample_point_of_point_is_center() {
        let z = Zonotope::point(DVector::from_column_slice(&[4.0, 5.0])).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert_eq!(z.sample_point(&mut rng), *z.center());
    }

    #[test]
    fn sample_point_is_reproducible() {
        let z = zono(&[0.0, 0.0], &[&[1.0, 0.5], &[0.2, -0.7], &[0.0, 0.3]]);
        let mut a = ChaCha12Rng::seed_from_u64(42);
        let mut b = ChaCha12Rng::seed_from_u64(42);
        for _ in 0..32 {
            assert_eq!(z.sample_point(&mut a), z.sample_point(&mut b));
        }
    }

    #[test]
    fn samples_are_contained() {
        let z = zono(&[1.0, 2.0], &[&[1.0, 0.1], &[-0.3, 0.9], &[0.2, 0.2]]);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..500 {
            let p = z.sample_point(&mut rng);
            assert!(z.contains_point(&p).unwrap());
        }
    }

    #[test]
    fn rejects_non_finite_entries() {
        let center = DVector::from_column_slice(&[f64::NAN, 0.0]);
        assert!(Zonotope::new(center, DMatrix::zeros(2, 0)).is_err());
        let center = DVector::from_column_slice(&[0.0, 0.0]);
        let gens = DMatrix::from_row_slice(2, 1, &[f64::INFINITY, 0.0]);
        assert!(Zonotope::new(center, gens).is_err());
    }

    #[test]
    fn interval_box_validates_bounds() {
        let l = DVector::from_column_slice(&[0.0, 1.0]);
        let u = DVector::from_column_slice(&[1.0, 0.5]);
        assert!(IntervalBox::new(l, u).is_err());
    }

    /// Brute-force oracle: x is in <c, G> if some beta on a 0.01 grid of
    /// [-1,1]^gamma reproduces it to within 1e-6.
    fn grid_oracle(z: &Zonotope, x: &DVector<f64>) -> bool {
        let gamma = z.order();
        let steps = 201usize;
        let mut idx = vec![0usize; gamma];
        loop {
            let beta = DVector::from_fn(gamma, |i, _| -1.0 + 0.01 * idx[i] as f64);
            let p = z.center() + z.generators() * beta;
            if (p - x).amax() <= 1e-6 {
                return true;
            }
            let mut carry = 0;
            loop {
                if carry == gamma {
                    return false;
                }
                idx[carry] += 1;
                if idx[carry] < steps {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
        }
    }

    #[test]
    fn membership_matches_grid_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for gamma in 1..=3usize {
            for _ in 0..4 {
                let gens = DMatrix::from_fn(2, gamma, |_, _| rng.random_range(-1.0..=1.0));
                let c = DVector::from_fn(2, |_, _| rng.random_range(-1.0..=1.0));
                let z = Zonotope::new(c, gens).unwrap();

                // inside: a grid-aligned beta, including the boundary
                let beta = DVector::from_fn(gamma, |i, _| {
                    if i % 2 == 0 { 1.0 } else { -0.25 }
                });
                let inside = z.center() + z.generators() * beta;
                assert!(z.contains_point(&inside).unwrap());
                assert!(grid_oracle(&z, &inside));

                // outside: step well past the support in a generator-normal direction
                let g = z.generators().column(0);
                let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
                if norm < 1e-6 {
                    continue;
                }
                let u = DVector::from_column_slice(&[-g[1] / norm, g[0] / norm]);
                let support: f64 = z
                    .generators()
                    .column_iter()
                    .map(|col| (u[0] * col[0] + u[1] * col[1]).abs())
                    .sum();
                let outside = z.center() + &u * (support + 0.05);
                assert!(!z.contains_point(&outside).unwrap());
                assert!(!grid_oracle(&z, &outside));
            }
        }
    }

    proptest! {
        #[test]
        fn minkowski_sum_commutes_in_set_semantics(
            c1 in proptest::array::uniform2(-5.0f64..5.0),
            c2 in proptest::array::uniform2(-5.0f64..5.0),
            g1 in proptest::collection::vec(-2.0f64..2.0, 2 * 3),
            g2 in proptest::collection::vec(-2.0f64..2.0, 2 * 2),
        ) {
            let a = Zonotope::new(
                DVector::from_column_slice(&c1),
                DMatrix::from_column_slice(2, 3, &g1),
            ).unwrap();
            let b = Zonotope::new(
                DVector::from_column_slice(&c2),
                DMatrix::from_column_slice(2, 2, &g2),
            ).unwrap();
            let ab = a.minkowski_sum(&b).unwrap();
            let ba = b.minkowski_sum(&a).unwrap();
            prop_assert_eq!(ab.center(), ba.center());

            let hull_ab = ab.interval_hull();
            let hull_ba = ba.interval_hull();
            prop_assert!((hull_ab.lower - hull_ba.lower).amax() < 1e-12);
            prop_assert!((hull_ab.upper - hull_ba.upper).amax() < 1e-12);

            // same generator multiset up to column order
            let mut cols_ab: Vec<Vec<u64>> = ab.generators().column_iter()
                .map(|c| c.iter().map(|v| v.to_bits()).collect()).collect();
            let mut cols_ba: Vec<Vec<u64>> = ba.generators().column_iter()
                .map(|c| c.iter().map(|v| v.to_bits()).collect()).collect();
            cols_ab.sort();
            cols_ba.sort();
            prop_assert_eq!(cols_ab, cols_ba);
        }

        #[test]
        fn linear_map_distributes_over_minkowski_sum(
            c1 in proptest::array::uniform2(-5.0f64..5.0),
            c2 in proptest::array::uniform2(-5.0f64..5.0),
            g1 in proptest::collection::vec(-2.0f64..2.0, 2 * 2),
            g2 in proptest::collection::vec(-2.0f64..2.0, 2 * 3),
            m in proptest::collection::vec(-2.0f64..2.0, 4),
        ) {
            let a = Zonotope::new(
                DVector::from_column_slice(&c1),
                DMatrix::from_column_slice(2, 2, &g1),
            ).unwrap();
            let b = Zonotope::new(
                DVector::from_column_slice(&c2),
                DMatrix::from_column_slice(2, 3, &g2),
            ).unwrap();
            let l = DMatrix::from_column_slice(2, 2, &m);

            let lhs = a.minkowski_sum(&b).unwrap().linear_map(&l).unwrap();
            let rhs = a.linear_map(&l).unwrap()
                .minkowski_sum(&b.linear_map(&l).unwrap()).unwrap();

            prop_assert!((lhs.center() - rhs.center()).amax() < 1e-12);
            prop_assert_eq!(lhs.generators(), rhs.generators());
        }
    }
}
