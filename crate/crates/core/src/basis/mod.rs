//! One-dimensional hierarchical bases and the transfer tables built from them.
//!
//! Nodes of the dyadic hierarchy are indexed by level `l` and translation `j`.
//! Level 0 is the coarse space on `[0, 1]`; a node at level `l >= 1` is supported
//! on the dyadic cell of width `2^{-(l-1)}` with index `j < 2^{l-1}`.

mod alpert;
mod interp;
mod tables;

pub use alpert::AlpertBasis;
pub use interp::{InterpBasis, InterpFamily};
pub use tables::{cell_integrals, Coupling, OperatorTables, Transfer1D};

use crate::poly::Side;

/// A node `(level, index)` of the 1D dyadic hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node1D {
    pub level: u32,
    pub index: u32,
}

impl Node1D {
    pub const ROOT: Node1D = Node1D { level: 0, index: 0 };

    pub fn new(level: u32, index: u32) -> Self {
        debug_assert!(level == 0 && index == 0 || level > 0 && index < (1 << (level - 1)));
        Self { level, index }
    }

    /// Dense id: 0 for the root, `2^{l-1} + j` otherwise.
    pub fn id(self) -> usize {
        if self.level == 0 {
            0
        } else {
            (1usize << (self.level - 1)) + self.index as usize
        }
    }

    pub fn from_id(id: usize) -> Self {
        if id == 0 {
            return Self::ROOT;
        }
        let level = usize::BITS - id.leading_zeros();
        Self { level, index: (id - (1usize << (level - 1))) as u32 }
    }

    /// Number of nodes with level at most `max_level`.
    pub fn count(max_level: u32) -> usize {
        1usize << max_level
    }

    pub fn all(max_level: u32) -> impl Iterator<Item = Node1D> {
        (0..Self::count(max_level)).map(Self::from_id)
    }

    /// Closed support `[a, b]`.
    pub fn support(self) -> (f64, f64) {
        if self.level == 0 {
            return (0.0, 1.0);
        }
        let h = cell_width(self.level - 1);
        (self.index as f64 * h, (self.index + 1) as f64 * h)
    }

    /// Points where functions of this node may be discontinuous, reduced modulo 1.
    pub fn breakpoints(self) -> Vec<f64> {
        if self.level == 0 {
            return vec![0.0];
        }
        let (a, b) = self.support();
        let mut pts: Vec<f64> = [a, 0.5 * (a + b), b]
            .into_iter()
            .map(|x| if x >= 1.0 { x - 1.0 } else { x })
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn parent(self) -> Option<Node1D> {
        match self.level {
            0 => None,
            1 => Some(Self::ROOT),
            l => Some(Self { level: l - 1, index: self.index / 2 }),
        }
    }

    pub fn children(self) -> Vec<Node1D> {
        if self.level == 0 {
            vec![Self { level: 1, index: 0 }]
        } else {
            let l = self.level + 1;
            vec![Self { level: l, index: 2 * self.index }, Self { level: l, index: 2 * self.index + 1 }]
        }
    }

    /// True if `self` equals `other` or is one of its ancestors.
    pub fn is_ancestor_of(self, other: Node1D) -> bool {
        if self.level > other.level {
            return false;
        }
        if self.level == 0 {
            return true;
        }
        (other.index >> (other.level - self.level)) == self.index
    }

    /// True if the two supports are nested (their interiors overlap).
    pub fn nested_with(self, other: Node1D) -> bool {
        self.is_ancestor_of(other) || other.is_ancestor_of(self)
    }
}

/// `2^{-l}`.
pub fn cell_width(l: u32) -> f64 {
    f64::powi(0.5, l as i32)
}

/// A family of functions attached to the nodes of the dyadic hierarchy.
pub trait Hierarchical1D: Sync {
    /// Functions per node.
    fn local_size(&self) -> usize;
    /// Maximal polynomial degree of any piece.
    fn degree(&self) -> usize;
    /// One-sided value of the `deriv`-th derivative of local function `local` of `node`.
    fn eval(&self, node: Node1D, local: usize, x: f64, side: Side, deriv: usize) -> f64;

    /// Value with the periodic convention that the left limit at 0 is the left limit at 1.
    fn eval_periodic(&self, node: Node1D, local: usize, x: f64, side: Side, deriv: usize) -> f64 {
        if x == 0.0 && side == Side::Minus {
            self.eval(node, local, 1.0, Side::Minus, deriv)
        } else {
            self.eval(node, local, x, side, deriv)
        }
    }
}
