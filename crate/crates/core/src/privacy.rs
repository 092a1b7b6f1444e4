//! Fail-closed column gate with an append-only audit trail.
//!
//! Feature extraction and training only accept a [`ColumnApproval`], and the
//! only way to obtain one is [`PrivacyGate::check_columns`]. A request that
//! names any sensitive column is denied as a whole; nothing is silently
//! dropped.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Purpose under which the pipeline reads registry-derived columns.
pub const DEFAULT_PURPOSE: &str = "graduation_prediction";

#[derive(Debug, Error)]
pub enum PrivacyError {
    #[error("privacy policy denies sensitive column(s): {}", .columns.join(", "))]
    Denied { columns: Vec<String> },
    #[error("purpose `{0}` is not allowed by the privacy policy")]
    UnknownPurpose(String),
    #[error("invalid privacy policy: {0}")]
    InvalidPolicy(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("privacy policy json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = PrivacyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacyPolicy {
    pub policy_version: u32,
    pub sensitive_columns: BTreeSet<String>,
    pub allowed_purposes: BTreeSet<String>,
}

impl Default for PrivacyPolicy {
    /// GDPR special-category attributes are sensitive; registry-derived
    /// study columns are not.
    fn default() -> Self {
        PrivacyPolicy {
            policy_version: 1,
            sensitive_columns: ["ethnicity", "health", "religion", "political_opinion"]
                .into_iter()
                .map(String::from)
                .collect(),
            allowed_purposes: [DEFAULT_PURPOSE.to_string()].into_iter().collect(),
        }
    }
}

impl PrivacyPolicy {
    pub fn from_json(text: &str) -> Result<Self> {
        let policy: PrivacyPolicy = serde_json::from_str(text)?;
        policy.validate()?;
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| PrivacyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensitive_columns.iter().any(|c| c.trim().is_empty()) {
            return Err(PrivacyError::InvalidPolicy(
                "sensitive column names must be non-empty".into(),
            ));
        }
        if self.allowed_purposes.iter().any(|p| p.trim().is_empty()) {
            return Err(PrivacyError::InvalidPolicy(
                "purpose names must be non-empty".into(),
            ));
        }
        if let Some(p) = self
            .allowed_purposes
            .iter()
            .find(|p| self.sensitive_columns.contains(*p))
        {
            return Err(PrivacyError::InvalidPolicy(format!(
                "`{p}` is listed both as a purpose and as a sensitive column"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Allowed,
    Denied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub timestamp: String,
    pub operation: String,
    pub purpose: String,
    pub requested_columns: Vec<String>,
    pub decision: Decision,
    pub denied_columns: Vec<String>,
    pub policy_version: u32,
}

/// Append-only audit log, optionally mirrored to a newline-delimited JSON file.
#[derive(Debug, Default)]
pub struct AuditLog {
    entries: Vec<AuditEntry>,
    sink: Option<(PathBuf, File)>,
}

impl AuditLog {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens `path` for appending; existing records are kept on disk but not loaded.
    pub fn with_file(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| PrivacyError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        Ok(AuditLog {
            entries: Vec::new(),
            sink: Some((path.to_path_buf(), file)),
        })
    }

    pub fn entries(&self) -> &[AuditEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn append(&mut self, entry: AuditEntry) -> Result<()> {
        if let Some((path, file)) = &mut self.sink {
            let mut line = serde_json::to_string(&entry)?;
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|source| PrivacyError::Io {
                    path: path.clone(),
                    source,
                })?;
        }
        self.entries.push(entry);
        Ok(())
    }
}

/// Reads every record of an NDJSON audit file.
pub fn read_audit_file(path: &Path) -> Result<Vec<AuditEntry>> {
    let file = File::open(path).map_err(|source| PrivacyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| PrivacyError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Proof that a column set passed the gate. Cannot be built outside this module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnApproval {
    columns: BTreeSet<String>,
    purpose: String,
    policy_version: u32,
}

impl ColumnApproval {
    pub fn columns(&self) -> &BTreeSet<String> {
        &self.columns
    }

    pub fn purpose(&self) -> &str {
        &self.purpose
    }

    pub fn policy_version(&self) -> u32 {
        self.policy_version
    }

    pub fn covers<'a, I>(&self, columns: I) -> bool
    where
        I: IntoIterator<Item = &'a str>,
    {
        columns.into_iter().all(|c| self.columns.contains(c))
    }

    /// First column of `columns` the approval does not cover.
    pub fn first_missing<'a, I>(&self, columns: I) -> Option<&'a str>
    where
        I: IntoIterator<Item = &'a str>,
    {
        columns.into_iter().find(|c| !self.columns.contains(*c))
    }
}

#[derive(Debug)]
pub struct PrivacyGate {
    policy: PrivacyPolicy,
    log: AuditLog,
}

impl PrivacyGate {
    pub fn new(policy: PrivacyPolicy, log: AuditLog) -> Result<Self> {
        policy.validate()?;
        Ok(PrivacyGate { policy, log })
    }

    pub fn policy(&self) -> &PrivacyPolicy {
        &self.policy
    }

    pub fn audit_log(&self) -> &AuditLog {
        &self.log
    }

    /// Approves `requested` unchanged iff it contains no sensitive column.
    ///
    /// Every call with a known purpose appends exactly one audit entry,
    /// allowed or denied. An unknown purpose is rejected before the check
    /// and is not audited.
    pub fn check_columns<S: AsRef<str>>(
        &mut self,
        operation: &str,
        requested: &[S],
        purpose: &str,
    ) -> Result<ColumnApproval> {
        if !self.policy.allowed_purposes.contains(purpose) {
            return Err(PrivacyError::UnknownPurpose(purpose.to_string()));
        }
        let requested: Vec<String> = requested.iter().map(|c| c.as_ref().to_string()).collect();
        let mut denied: Vec<String> = requested
            .iter()
            .filter(|c| self.policy.sensitive_columns.contains(c.as_str()))
            .cloned()
            .collect();
        denied.sort();
        denied.dedup();
        let decision = if denied.is_empty() {
            Decision::Allowed
        } else {
            Decision::Denied
        };
        self.log.append(AuditEntry {
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            operation: operation.to_string(),
            purpose: purpose.to_string(),
            requested_columns: requested.clone(),
            decision,
            denied_columns: denied.clone(),
            policy_version: self.policy.policy_version,
        })?;
        match decision {
            Decision::Allowed => Ok(ColumnApproval {
                columns: requested.into_iter().collect(),
                purpose: purpose.to_string(),
                policy_version: self.policy.policy_version,
            }),
            Decision::Denied => Err(PrivacyError::Denied { columns: denied }),
        }
    }
}

/// Parses an RFC 3339 timestamp written by the audit log.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s).ok().map(|t| t.with_timezone(&Utc))
}
