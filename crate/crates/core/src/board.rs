//! Board geometry: positions, the 120° rotation, cells and winning masks.
//!
//! Positions are numbered row-major from 1 at the apex, so row `r` holds
//! ids `T_{r-1}+1 ..= T_r`. A cell is one `k`-level sub-triangle of the
//! board; cells are indexed in the lexicographic enumeration order of
//! [`crate::tri::for_each_subtriangle`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::{CellSet, MaskTable};
use crate::tri::{for_each_subtriangle, level_of_index, triangular_number, TriangularSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub row: u64,
    pub col: u64,
}

impl Position {
    pub fn new(row: u64, col: u64) -> Self {
        assert!(
            row >= 1 && col >= 1 && col <= row,
            "bad position ({row}, {col})"
        );
        Self { row, col }
    }

    pub fn from_id(id: u64) -> Self {
        assert!(id >= 1);
        let row = level_of_index(id as usize - 1);
        Self {
            row,
            col: id - triangular_number(row - 1),
        }
    }

    pub fn id(self) -> u64 {
        triangular_number(self.row - 1) + self.col
    }
}

/// One clockwise 120° turn of an `m`-row board.
///
/// Barycentric coordinates `(m - row, col - 1, row - col)` are cycled to
/// `(c, a, b)` and mapped back.
pub fn rotate_position(pos: Position, m: u64) -> Position {
    debug_assert!(pos.row <= m);
    let a = m - pos.row;
    let c = pos.row - pos.col;
    // (a, b, c) -> (c, a, b)
    Position::new(m - c, a + 1)
}

/// Left-right reflection; keeps every row in place.
pub fn mirror_position(pos: Position) -> Position {
    Position::new(pos.row, pos.row + 1 - pos.col)
}

pub fn rotate_id(id: u64, m: u64) -> u64 {
    rotate_position(Position::from_id(id), m).id()
}

/// The cells of an `m`-level board for a given cell size `k`.
#[derive(Debug, Clone)]
pub struct Board {
    m: u64,
    k: u64,
    cells: Vec<TriangularSet>,
    index: HashMap<Vec<u64>, usize>,
}

impl Board {
    pub fn new(m: u64, k: u64) -> Self {
        assert!(k <= m);
        let mut cells = Vec::new();
        for_each_subtriangle(m, k, |idx| {
            cells.push(TriangularSet::new(idx.iter().map(|&i| i as u64 + 1)).unwrap());
        });
        let index = if k == 1 {
            HashMap::new()
        } else {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| (c.elements().to_vec(), i))
                .collect()
        };
        Self { m, k, cells, index }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, i: usize) -> &TriangularSet {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[TriangularSet] {
        &self.cells
    }

    pub fn position_count(&self) -> u64 {
        triangular_number(self.m)
    }

    /// Index of the cell made of exactly these (sorted) positions.
    pub fn cell_of(&self, positions: &[u64]) -> Option<usize> {
        if self.k == 1 {
            match positions {
                [p] if *p >= 1 && *p <= self.position_count() => Some(*p as usize - 1),
                _ => None,
            }
        } else {
            self.index.get(positions).copied()
        }
    }

    /// For `k = 1` boards, the cell mask of each row.
    pub fn row_masks(&self) -> Vec<CellSet> {
        assert_eq!(self.k, 1);
        (1..=self.m)
            .map(|r| {
                let lo = triangular_number(r - 1) as usize;
                CellSet::from_indices(self.cell_count(), lo..lo + r as usize)
            })
            .collect()
    }

    /// Every `p`-level sub-triangle `Z` of the board with the mask of cells
    /// that make up `Z`.
    pub fn winning_sets(&self, p: u64) -> WinningSets {
        assert!(self.k <= p && p <= self.m);
        let stride = triangular_number(p) as usize;
        let mut inner: Vec<Vec<usize>> = Vec::new();
        for_each_subtriangle(p, self.k, |idx| inner.push(idx.to_vec()));
        let mut positions = Vec::new();
        let mut masks = MaskTable::new(self.cell_count());
        let mut key = Vec::with_capacity(triangular_number(self.k) as usize);
        for_each_subtriangle(self.m, p, |zidx| {
            let start = positions.len();
            positions.extend(zidx.iter().map(|&i| i as u64 + 1));
            let z = &positions[start..start + stride];
            let mut mask = CellSet::new(self.cell_count());
            for sub in &inner {
                key.clear();
                key.extend(sub.iter().map(|&i| z[i]));
                let cell = self.cell_of(&key).expect("sub-triangle is a cell");
                mask.insert(cell);
            }
            masks.push(&mask);
        });
        WinningSets {
            level_count: p,
            stride,
            positions,
            masks,
        }
    }
}

/// The `p`-level sub-triangles of a board together with their cell masks.
#[derive(Debug, Clone)]
pub struct WinningSets {
    level_count: u64,
    stride: usize,
    positions: Vec<u64>,
    masks: MaskTable,
}

impl WinningSets {
    pub fn level_count(&self) -> u64 {
        self.level_count
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &MaskTable {
        &self.masks
    }

    pub fn positions(&self, i: usize) -> &[u64] {
        &self.positions[i * self.stride..(i + 1) * self.stride]
    }

    pub fn witness(&self, i: usize) -> TriangularSet {
        TriangularSet::new(self.positions(i).iter().copied()).unwrap()
    }

    /// First set whose cells all lie in `owned`.
    pub fn find_inside(&self, owned: &CellSet) -> Option<usize> {
        self.masks.first_inside(owned)
    }

    /// The same sets seen from direction `d`: a position set `S` wins in
    /// direction `d` when `d - 1` turns carry it onto a standard triangle,
    /// so each standard set is turned back `d - 1` times. Only `k = 1`.
    pub fn for_direction(&self, board: &Board, direction: u8) -> WinningSets {
        assert_eq!(board.k(), 1);
        assert!((1..=3).contains(&direction));
        // turning back once equals turning forward twice
        let turns = (2 * (direction as u32 - 1)) % 3;
        let m = board.m();
        let mut positions = Vec::with_capacity(self.positions.len());
        let mut masks = MaskTable::new(board.cell_count());
        for i in 0..self.len() {
            let mut mask = CellSet::new(board.cell_count());
            for &p in self.positions(i) {
                let mut id = p;
                for _ in 0..turns {
                    id = rotate_id(id, m);
                }
                positions.push(id);
                mask.insert(id as usize - 1);
            }
            masks.push(&mask);
        }
        WinningSets {
            level_count: self.level_count,
            stride: self.stride,
            positions,
            masks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(id: u64, m: u64) -> u64 {
        rotate_id(id, m)
    }

    #[test]
    fn position_ids() {
        assert_eq!(Position::from_id(1), Position::new(1, 1));
        assert_eq!(Position::from_id(5), Position::new(3, 2));
        assert_eq!(Position::from_id(15), Position::new(5, 5));
        for id in 1..=78 {
            assert_eq!(Position::from_id(id).id(), id);
        }
    }

    #[test]
    fn rotation_examples() {
        assert_eq!((rot(1, 3), rot(6, 3), rot(4, 3)), (6, 4, 1));
        assert_eq!((rot(2, 3), rot(3, 3), rot(5, 3)), (3, 5, 2));
        assert_eq!(rot(1, 1), 1);
        // {1,3,4} turns onto {1,5,6}
        let mut img: Vec<u64> = [1, 3, 4].iter().map(|&i| rot(i, 3)).collect();
        img.sort();
        assert_eq!(img, vec![1, 5, 6]);
    }

    #[test]
    fn rotation_has_order_three() {
        for m in 1..=12 {
            for id in 1..=triangular_number(m) {
                assert_eq!(rot(rot(rot(id, m), m), m), id);
                let p = Position::from_id(id);
                assert_eq!(mirror_position(mirror_position(p)), p);
            }
        }
    }

    #[test]
    fn cells_and_winning_sets() {
        let b = Board::new(3, 1);
        assert_eq!(b.cell_count(), 6);
        assert_eq!(b.cell_of(&[4]), Some(3));
        let w = b.winning_sets(2);
        assert_eq!(w.len(), 10);
        assert_eq!(w.witness(0).elements(), &[1, 2, 3]);

        let b = Board::new(5, 2);
        assert_eq!(b.cell_count(), 146);
        let w = b.winning_sets(3);
        assert_eq!(w.len(), 501);
        for i in 0..w.len() {
            assert_eq!(CellSet::from_words(w.masks().get(i).to_vec()).len(), 10);
        }
        // the top triangle {1..6} and its ten sub-cells
        let top = (0..w.len())
            .find(|&i| w.positions(i) == [1, 2, 3, 4, 5, 6])
            .unwrap();
        let cells: Vec<usize> = CellSet::from_words(w.masks().get(top).to_vec())
            .iter()
            .collect();
        for c in cells {
            assert!(b.cell(c).elements().iter().all(|&p| p <= 6));
        }
    }

    #[test]
    fn direction_one_is_standard() {
        let b = Board::new(4, 1);
        let w = b.winning_sets(2);
        let d1 = w.for_direction(&b, 1);
        assert_eq!(d1.masks().as_u64(), w.masks().as_u64());
        let b3 = Board::new(3, 1);
        let d2 = b3.winning_sets(2).for_direction(&b3, 2);
        let has = |set: &[usize]| {
            let s = CellSet::from_indices(6, set.iter().copied());
            d2.masks().any_inside(&s)
        };
        // {1,3,4} is a direction-2 triangle
        assert!(has(&[0, 2, 3]));
    }
}
