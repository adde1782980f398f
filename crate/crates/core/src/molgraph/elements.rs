//! Periodic-table lookups and the default valence model.

const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

/// Atomic number for a case-sensitive element symbol.
pub fn atomic_number(symbol: &str) -> Option<u8> {
    SYMBOLS
        .iter()
        .position(|s| *s == symbol)
        .map(|p| (p + 1) as u8)
}

pub fn is_element(symbol: &str) -> bool {
    atomic_number(symbol).is_some()
}

pub fn symbol(atomic_number: u8) -> Option<&'static str> {
    SYMBOLS.get(atomic_number.checked_sub(1)? as usize).copied()
}

/// Elements that may be written without brackets in SMILES.
pub fn is_organic_subset(symbol: &str) -> bool {
    matches!(
        symbol,
        "B" | "C" | "N" | "O" | "P" | "S" | "F" | "Cl" | "Br" | "I"
    )
}

/// Elements that have a lowercase aromatic spelling.
pub fn has_aromatic_form(symbol: &str) -> bool {
    matches!(
        symbol,
        "B" | "C" | "N" | "O" | "P" | "S" | "Se" | "As" | "Te"
    )
}

// p-block rows used for isoelectronic charge shifting; the noble gas closes each row.
const ROWS: [(u8, u8); 4] = [(5, 10), (13, 18), (31, 36), (49, 54)];

fn neutral_valences(z: u8) -> Option<&'static [u8]> {
    Some(match z {
        1 => &[1],
        5 | 13 | 31 | 49 => &[3],
        6 | 14 | 32 | 50 => &[4],
        7 | 15 | 33 | 51 => &[3, 5],
        8 => &[2],
        16 | 34 | 52 => &[2, 4, 6],
        9 | 17 | 35 | 53 => &[1],
        10 | 18 | 36 | 54 => &[0],
        _ => return None,
    })
}

/// Allowed valences for an element carrying `charge`, or `None` when the
/// element has no valence model (metals, charged hydrogen, ...).
///
/// Charged atoms take the valences of their isoelectronic neighbour in the
/// same p-block row, so N+ behaves like C and O- like F.
pub fn default_valences(z: u8, charge: i8) -> Option<&'static [u8]> {
    if charge == 0 {
        return neutral_valences(z);
    }
    if z == 1 {
        return None;
    }
    let shifted = z as i16 - charge as i16;
    let row = ROWS.iter().find(|(lo, hi)| (*lo..=*hi).contains(&z))?;
    if shifted < row.0 as i16 || shifted > row.1 as i16 {
        return None;
    }
    neutral_valences(shifted as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip() {
        for z in 1..=118u8 {
            let s = symbol(z).unwrap();
            assert_eq!(atomic_number(s), Some(z));
        }
        assert_eq!(atomic_number("c"), None);
        assert_eq!(atomic_number("R1"), None);
    }

    #[test]
    fn charged_valences() {
        assert_eq!(default_valences(7, 1), Some(&[4u8][..]));
        assert_eq!(default_valences(8, -1), Some(&[1u8][..]));
        assert_eq!(default_valences(6, -1), Some(&[3u8, 5][..]));
        assert_eq!(default_valences(9, -1), Some(&[0u8][..]));
        assert_eq!(default_valences(26, 0), None);
        assert_eq!(default_valences(5, 4), None);
    }
}
