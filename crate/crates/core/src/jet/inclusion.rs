use super::multi_index::MultiIndex;
use super::space::{JetPoint, JetSpace};

/// The canonical inclusion `J^{k+1}(E) -> J^1(J^k(E))` in coordinates.
///
/// A point of `J^1(J^k(E))` is a point of `J^k(E)` (the first layer)
/// together with one derivative slot per (jet coordinate, base direction)
/// pair (the second layer). The inclusion sends the `J^{k+1}` coordinate
/// `y^a_(mu+1_j)` to the slot `(y^a_mu)_,j`; symmetry of the canonical
/// multi-index is what identifies slots that came from the same source.
#[derive(Debug, Clone)]
pub struct CanonicalInclusion {
    base: JetSpace,
    raised: JetSpace,
}

/// A point of `J^1(J^k(E))`: first-layer values aligned with the base
/// space coordinates, and second-layer values indexed `[jet coord][j-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredPoint {
    pub first: Vec<f64>,
    pub second: Vec<Vec<f64>>,
}

impl CanonicalInclusion {
    pub fn new(space: &JetSpace) -> Self {
        CanonicalInclusion {
            base: space.clone(),
            raised: space.raise_order(1),
        }
    }

    pub fn base(&self) -> &JetSpace {
        &self.base
    }

    pub fn raised(&self) -> &JetSpace {
        &self.raised
    }

    /// Coordinate index (in the raised space) receiving the second-layer
    /// slot `((fiber, mu), j)`.
    pub fn target_index(&self, fiber: usize, mu: &MultiIndex, j: usize) -> usize {
        let name = self.raised.jet_coord_name(fiber, &mu.plus(j as u8));
        self.raised
            .coord_index(&name)
            .expect("raised space contains all mu+1_j coordinates")
    }

    /// All decompositions `sigma = mu + 1_j` of a multi-index.
    pub fn decompositions(&self, sigma: &MultiIndex) -> Vec<(MultiIndex, usize)> {
        sigma
            .distinct_entries()
            .into_iter()
            .map(|j| {
                (
                    sigma.minus(j).expect("distinct entry is present"),
                    j as usize,
                )
            })
            .collect()
    }

    /// Push a `J^{k+1}` point through the inclusion.
    pub fn embed(&self, p: &JetPoint) -> LayeredPoint {
        debug_assert_eq!(p.values().len(), self.raised.coord_count());
        let first = p.values()[..self.base.coord_count()].to_vec();
        let n = self.base.base_dim();
        let second = self
            .base
            .jet_coords()
            .iter()
            .map(|jc| {
                (1..=n)
                    .map(|j| p.get(self.target_index(jc.fiber, &jc.mu, j)))
                    .collect()
            })
            .collect();
        LayeredPoint { first, second }
    }

    /// How far a layered point is from the image of the inclusion: the
    /// worst violation of (a) second-layer slots over below-top rows
    /// matching the first-layer jet they name, and (b) agreement of all
    /// slots sharing a canonical top multi-index.
    pub fn image_defect(&self, p: &LayeredPoint) -> f64 {
        let n = self.base.base_dim();
        let k = self.base.order();
        let mut worst: f64 = 0.0;
        for (ci, jc) in self.base.jet_coords().iter().enumerate() {
            for j in 1..=n {
                let slot = p.second[ci][j - 1];
                if jc.mu_order < k {
                    let name = self.base.jet_coord_name(jc.fiber, &jc.mu.plus(j as u8));
                    let idx = self
                        .base
                        .coord_index(&name)
                        .expect("below-top raise stays in the base space");
                    worst = worst.max((slot - p.first[idx]).abs());
                } else {
                    // compare against every other decomposition of the target
                    let sigma = jc.mu.plus(j as u8);
                    for (mu2, j2) in self.decompositions(&sigma) {
                        let ci2 = self
                            .base
                            .jet_coord_index(jc.fiber, &mu2)
                            .expect("decomposition stays in the base space");
                        worst = worst.max((slot - p.second[ci2][j2 - 1]).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn is_in_image(&self, p: &LayeredPoint, tol: f64) -> bool {
        self.image_defect(p) < tol
    }
}
