//! Shared fixtures for the criterion benches.

use std::path::PathBuf;

use qpm_core::{CrystalDatabase, DispersionModel};

/// The crystal database shipped at the workspace root.
pub fn shipped_database() -> CrystalDatabase {
    CrystalDatabase::open(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../crystals"))
}

pub fn kato() -> DispersionModel {
    shipped_database().load("ktp-kato").expect("shipped crystal")
}
