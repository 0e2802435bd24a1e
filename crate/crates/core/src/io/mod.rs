//! File formats.

mod config;
mod events;
mod pfm;

pub use config::{RunConfig, ThresholdSource};
pub use events::{
    read_events, read_events_binary, read_events_text, read_syncs, sync_path, write_events,
    write_events_binary, write_events_text, EventFormat, BINARY_MAGIC, TEXT_HEADER,
};
pub use pfm::{
    normals_to_pfm, pfm_to_normals, pfm_to_scalar, read_pfm, scalar_to_pfm, write_pfm, PfmImage,
};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{NormalMap, PixelThresholds, ScalarMap};
use crate::profile::Profile;

/// `time,value,valid` rows, one per sample.
pub fn profile_to_csv(profile: &Profile) -> String {
    let mut out = String::from("time,value,valid\n");
    for i in 0..profile.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            profile.sample_time(i),
            profile.value(i),
            u8::from(profile.is_valid(i))
        );
    }
    out
}

pub fn write_profile_csv(path: &Path, profile: &Profile) -> Result<()> {
    std::fs::write(path, profile_to_csv(profile))?;
    Ok(())
}

/// `<prefix>.pos.pfm` and `<prefix>.neg.pfm`.
pub fn threshold_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".pos.pfm"), with(".neg.pfm"))
}

pub fn write_thresholds(prefix: &Path, thresholds: &PixelThresholds) -> Result<()> {
    let (pos, neg) = threshold_paths(prefix);
    write_scalar_pfm(&pos, thresholds.positive())?;
    write_scalar_pfm(&neg, thresholds.negative())
}

pub fn read_thresholds(prefix: &Path) -> Result<PixelThresholds> {
    let (pos, neg) = threshold_paths(prefix);
    let p = read_scalar_pfm(&pos)?;
    let n = read_scalar_pfm(&neg)?;
    if !p.same_shape(&n) {
        return Err(Error::config("threshold maps differ in size"));
    }
    PixelThresholds::new(p, n)
}

pub fn write_scalar_pfm(path: &Path, map: &ScalarMap) -> Result<()> {
    write_pfm(path, &scalar_to_pfm(map)?)
}

pub fn read_scalar_pfm(path: &Path) -> Result<ScalarMap> {
    pfm_to_scalar(&read_pfm(path)?)
}

pub fn write_normal_pfm(path: &Path, map: &NormalMap) -> Result<()> {
    write_pfm(path, &normals_to_pfm(map)?)
}

pub fn read_normal_pfm(path: &Path) -> Result<NormalMap> {
    pfm_to_normals(&read_pfm(path)?)
}
