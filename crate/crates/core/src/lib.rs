//! Toolkit for Markush structures in CXSMILES form: parsing and writing
//! SMILES/CXSMILES, reading MOL V2000 files and converting them into
//! CXSMILES with reconstructed Markush features, canonicalization and
//! structural keys, evaluation metrics for structure recognition, and
//! seeded CXSMILES augmentation.

pub mod augment;
pub mod canon;
pub mod convert;
pub mod metrics;
pub mod molfile;
pub mod molgraph;
pub mod notation;
pub mod synth;

pub use molgraph::{Atom, Bond, BondOrder, MolGraph};
pub use notation::{parse_cxsmiles, parse_smiles, write_cxsmiles, write_smiles, CxString};
