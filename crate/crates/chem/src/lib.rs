//! Molecule graphs, SMILES, canonical forms, fingerprints, substructure
//! patterns and retrosynthetic template application.

pub mod canon;
pub mod element;
pub mod fingerprint;
pub mod matcher;
pub mod mol;
pub mod pattern;
pub mod props;
pub mod smiles;
pub mod template;
pub mod valence;

pub use canon::{canonical_ranks, canonical_smiles, canonicalize, CanonicalSmiles};
pub use element::Element;
pub use fingerprint::{
    default_fingerprint, morgan_environment_ids, morgan_fingerprint, tanimoto, Fingerprint, FingerprintError,
};
pub use matcher::{has_match, match_pattern};
pub use mol::{Atom, Bond, BondKind, DoubleBondStereo, GraphError, MolGraph, StereoNeighbor, Tetrahedral};
pub use pattern::{parse_pattern, PatternError, PatternGraph};
pub use props::{complexity, mol_properties, molecular_weight, MolProperties, PropertyError};
pub use smiles::{parse_smiles, SmilesError};
pub use template::{
    apply_retro_template, parse_retro_template, Application, PrecursorSet, RetroTemplate, TemplateError,
    TemplateRecord,
};
