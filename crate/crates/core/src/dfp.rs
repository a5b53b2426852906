//! The distance-flow product (DFP) matrix, kept implicit.
//!
//! The DFP matrix of an order-n QAP instance is n^2 x n^2: row r corresponds
//! to the r-th distance entry in row-major order, column c to the c-th flow
//! entry, and the cell holds their product. It tiles into n^2 blocks of
//! size n x n; Block(a, b) pairs distance row b with flow row a and encodes
//! the assignment of factory a to location b. Entries are computed on
//! demand from the two factor matrices, never materialized for solving.

use crate::error::{Error, Result};
use crate::instance::QapInstance;
use crate::matrix::SquareMatrix;
use crate::solver::{evaluate_qap_cost, is_permutation};

/// Block coordinates: assigning `factory` to `location` selects this block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockId {
    pub factory: usize,
    pub location: usize,
}

/// Within-block coordinates: row = location, column = factory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ElementId {
    pub row: usize,
    pub col: usize,
}

/// Read-only view of the implicit DFP matrix of one instance.
pub struct DfpView<'a> {
    q: &'a QapInstance,
}

impl<'a> DfpView<'a> {
    pub fn new(q: &'a QapInstance) -> Self {
        DfpView { q }
    }

    pub fn n(&self) -> usize {
        self.q.n
    }

    /// Side length of the implicit matrix (n^2).
    pub fn order(&self) -> usize {
        self.q.n * self.q.n
    }

    /// Entry (r, c) of the implicit matrix, 0-based: the product of the
    /// r-th distance entry and the c-th flow entry in row-major order.
    pub fn element(&self, r: usize, c: usize) -> Result<f64> {
        let n = self.q.n;
        let order = n * n;
        if r >= order || c >= order {
            return Err(Error::IndexOutOfRange(format!(
                "dfp element ({r}, {c}) of a {order}x{order} matrix"
            )));
        }
        Ok(self.q.dist.get(r / n, r % n) * self.q.flow.get(c / n, c % n))
    }

    fn check_block(&self, id: BlockId) -> Result<()> {
        if id.factory >= self.q.n || id.location >= self.q.n {
            return Err(Error::IndexOutOfRange(format!(
                "block ({}, {}) of an order-{} instance",
                id.factory, id.location, self.q.n
            )));
        }
        Ok(())
    }

    /// Block(a, b) as a dense n x n matrix: `B[l][k] = dist[b][l] * flow[a][k]`.
    /// Under an assignment with `perm[a] = b`, factory a contributes exactly
    /// the entries `B[perm[k]][k]` to the total cost.
    pub fn block(&self, id: BlockId) -> Result<SquareMatrix> {
        self.check_block(id)?;
        let n = self.q.n;
        let mut b = SquareMatrix::zeros(n);
        for l in 0..n {
            for k in 0..n {
                b.set(l, k, self.q.dist.get(id.location, l) * self.q.flow.get(id.factory, k));
            }
        }
        Ok(b)
    }

    /// The block's single possibly-added element `dist[b][b] * flow[a][a]`,
    /// the one entry lying on both a diagonal-distance row and a
    /// diagonal-flow column. There are exactly n^2 of these.
    pub fn representative(&self, id: BlockId) -> Result<f64> {
        self.check_block(id)?;
        Ok(self.q.dist.get(id.location, id.location) * self.q.flow.get(id.factory, id.factory))
    }

    /// All n^2 representatives in (factory, location) lexicographic order,
    /// i.e. index `a * n + b` holds the representative of Block(a, b).
    pub fn representatives(&self) -> Vec<f64> {
        let n = self.q.n;
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                out.push(self.q.dist.get(b, b) * self.q.flow.get(a, a));
            }
        }
        out
    }

    /// Fraction of zero entries of the implicit matrix. A product is zero
    /// iff either factor is, so this equals
    /// `1 - (1 - z_dist) * (1 - z_flow)`. All counts are exact integers and
    /// the single division is correctly rounded, so the counting route and
    /// the closed form agree bit for bit.
    pub fn zero_ratio(&self) -> f64 {
        let total = (self.q.n * self.q.n) as u64;
        let nnz_d = total - self.q.dist.count_zeros() as u64;
        let nnz_f = total - self.q.flow.count_zeros() as u64;
        let dfp_zeros = total * total - nnz_d * nnz_f;
        dfp_zeros as f64 / (total * total) as f64
    }

    /// Dense copy, for diagnostics and oracle tests only (n <= 8).
    pub fn materialize(&self) -> Result<Vec<Vec<f64>>> {
        const LIMIT: usize = 8;
        if self.q.n > LIMIT {
            return Err(Error::TooLarge {
                n: self.q.n,
                limit: LIMIT,
            });
        }
        let order = self.order();
        let mut out = vec![vec![0.0; order]; order];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = self.element(r, c)?;
            }
        }
        Ok(out)
    }
}

/// Blocks selected by an assignment: `(a, perm[a])` for every factory a.
pub fn selected_blocks(perm: &[usize]) -> Vec<BlockId> {
    perm.iter()
        .enumerate()
        .map(|(factory, &location)| BlockId { factory, location })
        .collect()
}

/// Elements added within each selected block: row `perm[k]`, column `k`.
/// The same pattern as the selected blocks, read as (location, factory).
pub fn selected_elements(perm: &[usize]) -> Vec<ElementId> {
    perm.iter()
        .enumerate()
        .map(|(k, &location)| ElementId {
            row: location,
            col: k,
        })
        .collect()
}

/// Sum of the DFP entries that assigning `factory -> location` adds against
/// the already-placed assignments: the block's own representative plus both
/// interaction entries with every placed block. Accumulating increments
/// over any placement order reproduces the full objective.
pub fn placement_increment(
    q: &QapInstance,
    placed: &[(usize, usize)],
    factory: usize,
    location: usize,
) -> f64 {
    let mut inc = q.dist.get(location, location) * q.flow.get(factory, factory);
    for &(other_factory, other_location) in placed {
        inc += q.dist.get(location, other_location) * q.flow.get(factory, other_factory);
        inc += q.dist.get(other_location, location) * q.flow.get(other_factory, factory);
    }
    inc
}

/// Total cost assembled block by block: for each factory a, sum the entries
/// `B[perm[k]][k]` of Block(a, perm[a]). Equals the direct objective.
pub fn cost_from_blocks(q: &QapInstance, perm: &[usize]) -> Result<f64> {
    if !is_permutation(perm, q.n) {
        return Err(Error::NotAPermutation(q.n));
    }
    let view = DfpView::new(q);
    let mut cost = 0.0;
    for (factory, &location) in perm.iter().enumerate() {
        let block = view.block(BlockId { factory, location })?;
        for (k, &l) in perm.iter().enumerate() {
            cost += block.get(l, k);
        }
    }
    Ok(cost)
}

/// Convenience wrapper used by tests comparing the two cost routes.
pub fn direct_cost(q: &QapInstance, perm: &[usize]) -> Result<f64> {
    evaluate_qap_cost(q, perm)
}
