use std::fmt;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const MANIFEST_SCHEMA: &str = "catforge-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// No reference target applies to the artifact.
    Untargeted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Untargeted => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub path: String,
    pub scenario: String,
    pub parameters: String,
    pub status: Status,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MANIFEST_SCHEMA}\npath\tscenario\tparameters\tstatus\n");
        for a in &self.artifacts {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                a.path, a.scenario, a.parameters, a.status
            ));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_text()).map_err(|e| CliError::output(path, e))
    }
}
