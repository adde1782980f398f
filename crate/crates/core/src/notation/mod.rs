//! SMILES and CXSMILES reading and writing.
//!
//! The extension block supports the four Markush feature classes: atom
//! labels (variable groups and `_AP<n>` attach points), `m:` positional
//! variation and `Sg:n:` frequency variation. Other sections are skipped
//! with a warning.

mod cxsmiles;
mod features;
mod smiles;
pub(crate) mod writer;

pub use cxsmiles::{
    parse_cxsmiles, parse_cxsmiles_with_warnings, write_cxsmiles, CxParseError, CxString,
};
pub(crate) use cxsmiles::render_canonical;
pub use features::{
    is_attach_point_label, FrequencyVariation, MarkushFeatures, PositionalVariation,
    SgConnectivity,
};
pub use smiles::{parse_smiles, SmilesError, SmilesErrorKind};

use crate::molgraph::MolGraph;

/// SMILES for the backbone; Markush features are not written. With
/// `canonical` the output depends only on the molecule, otherwise atoms
/// are written in index order where the traversal allows.
pub fn write_smiles(g: &MolGraph, canonical: bool) -> String {
    if canonical {
        let (atoms, bonds, _) = g.clone().into_parts();
        let bare = MolGraph::new(atoms, bonds).expect("same atoms and bonds");
        let cf = crate::canon::canonical_form(&bare, true, false, false);
        writer::emit(&cf.graph, &cf.rank).text
    } else {
        let order: Vec<usize> = (0..g.atom_count()).collect();
        writer::emit(g, &order).text
    }
}
