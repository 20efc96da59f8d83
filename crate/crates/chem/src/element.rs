//! Periodic table data needed by the parser, the valence model and the
//! property calculator.

use std::fmt;

const SYMBOLS: [&str; 119] = [
    "*", "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S",
    "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
    "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd",
    "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn",
    "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
];

/// A chemical element identified by atomic number. Number 0 is the `*`
/// wildcard atom of SMILES.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(u8);

impl Element {
    pub const WILDCARD: Element = Element(0);
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const SI: Element = Element(14);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const SE: Element = Element(34);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_atomic_number(n: u8) -> Option<Element> {
        ((n as usize) < SYMBOLS.len()).then_some(Element(n))
    }

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        SYMBOLS
            .iter()
            .position(|s| *s == symbol)
            .map(|i| Element(i as u8))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        SYMBOLS[self.0 as usize]
    }

    /// Elements that may appear outside brackets in SMILES.
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 0 | 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// Elements that may be written in lowercase (aromatic) form.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34)
    }

    /// Standard atomic weight for the embedded organic table.
    pub fn atomic_weight(self) -> Option<f64> {
        Some(match self.0 {
            1 => 1.008,
            5 => 10.812,
            6 => 12.011,
            7 => 14.007,
            8 => 15.999,
            9 => 18.998,
            14 => 28.086,
            15 => 30.974,
            16 => 32.067,
            17 => 35.453,
            35 => 79.904,
            53 => 126.904,
            _ => return None,
        })
    }

    /// Allowed valences for an atom of this element carrying `charge`,
    /// lowest first. `None` means the element/charge combination is outside
    /// the valence model and is not checked.
    pub fn valences(self, charge: i8) -> Option<&'static [u8]> {
        let v: &'static [u8] = match (self.0, charge) {
            (0, _) => return None,
            (1, 0) => &[1],
            (1, 1) | (1, -1) => &[0],
            (5, 0) => &[3],
            (5, -1) => &[4],
            (6, 0) => &[4],
            (6, 1) | (6, -1) => &[3],
            (7, 0) => &[3, 5],
            (7, 1) => &[4],
            (7, -1) => &[2],
            (8, 0) => &[2],
            (8, 1) => &[3],
            (8, -1) => &[1],
            (9, 0) => &[1],
            (9, -1) => &[0],
            (14, 0) => &[4],
            (15, 0) => &[3, 5],
            (15, 1) => &[4],
            (15, -1) => &[2],
            (16, 0) => &[2, 4, 6],
            (16, 1) => &[3, 5],
            (16, -1) => &[1, 3, 5],
            (17, 0) | (35, 0) => &[1],
            (17, -1) | (35, -1) | (53, -1) => &[0],
            (53, 0) => &[1, 3, 5],
            (34, 0) => &[2, 4, 6],
            (33, 0) => &[3, 5],
            _ => return None,
        };
        Some(v)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_round_trip() {
        for n in 0..=118u8 {
            let e = Element::from_atomic_number(n).unwrap();
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
        }
        assert_eq!(Element::from_symbol("Xx"), None);
        assert_eq!(Element::from_atomic_number(119), None);
    }

    #[test]
    fn weights_cover_the_organic_table_only() {
        for sym in ["H", "B", "C", "N", "O", "F", "Si", "P", "S", "Cl", "Br", "I"] {
            assert!(Element::from_symbol(sym).unwrap().atomic_weight().is_some(), "{sym}");
        }
        assert!(Element::from_symbol("Na").unwrap().atomic_weight().is_none());
    }
}
