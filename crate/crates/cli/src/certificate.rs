//! Certificate records and their files.

use crate::config::ProblemParams;
use anyhow::{bail, Context, Result};
use bridgewave::bounds::{BoundSet, FailedCondition, RadiiResult};
use bridgewave::stability::{
    GershgorinSet, SpectralCount, SpectralWindow, StabilityVerdict, ThetaEnclosure,
};
use bridgewave::Interval;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const FORMAT: &str = "bridgewave-certificate";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Bounds,
    Stability,
}

/// Why a certificate is unsuccessful.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Failure {
    Contraction,
    Quadratic,
    Derivative,
    /// A computation stopped with an error; see `error`.
    Computation,
}

impl From<FailedCondition> for Failure {
    fn from(f: FailedCondition) -> Failure {
        match f {
            FailedCondition::Contraction => Failure::Contraction,
            FailedCondition::Quadratic => Failure::Quadratic,
            FailedCondition::Derivative => Failure::Derivative,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<FileDigest> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub bridgewave_version: String,
    pub rustc: String,
    /// Interval arithmetic model.
    pub interval_mode: String,
    pub threads: usize,
    pub deterministic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Metadata {
    pub fn current(deterministic: bool) -> Metadata {
        Metadata {
            bridgewave_version: env!("CARGO_PKG_VERSION").into(),
            rustc: env!("BRIDGEWAVE_RUSTC").into(),
            interval_mode: "binary64, outward rounded by one ulp per operation".into(),
            threads: rayon::current_num_threads(),
            deterministic,
            wall_time_s: None,
        }
    }
}

/// One enclosure pass over both sectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPass {
    pub window: SpectralWindow,
    pub even: GershgorinSet,
    pub odd: GershgorinSet,
    pub count: SpectralCount,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WbarReport {
    pub raw_defect: f64,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub r0: Interval,
    pub lambda_min: Interval,
    pub passes: Vec<SpectralPass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_norm: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wbar: Option<WbarReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaEnclosure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: String,
    pub version: u32,
    pub kind: CertificateKind,
    pub params: ProblemParams,
    pub coeff_file: FileDigest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_certificate: Option<FileDigest>,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_condition: Option<Failure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<RadiiResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<StabilityVerdict>,
    pub metadata: Metadata,
}

impl Certificate {
    pub fn new(
        kind: CertificateKind,
        params: ProblemParams,
        coeff_file: FileDigest,
        metadata: Metadata,
    ) -> Certificate {
        Certificate {
            format: FORMAT.into(),
            version: VERSION,
            kind,
            params,
            coeff_file,
            bound_certificate: None,
            success: false,
            failed_condition: None,
            error: None,
            bounds: None,
            radii: None,
            spectral: None,
            verdict: None,
            metadata,
        }
    }

    /// Marks the certificate as failed by an error.
    pub fn fail(&mut self, err: impl std::fmt::Display) {
        self.success = false;
        self.failed_condition = Some(Failure::Computation);
        self.error = Some(format!("{err:#}"));
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        let cert: Certificate = serde_json::from_str(text)?;
        if cert.format != FORMAT {
            bail!("not a bridgewave certificate (format {:?})", cert.format);
        }
        if cert.version != VERSION {
            bail!("unsupported certificate version {}", cert.version);
        }
        Ok(cert)
    }

    pub fn read(path: &Path) -> Result<Certificate> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading certificate {}", path.display()))?;
        Certificate::from_json(&text)
            .with_context(|| format!("parsing certificate {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        bridgewave::write_atomic(path, self.to_json()?.as_bytes())?;
        Ok(())
    }
}
