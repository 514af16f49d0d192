use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use toml::Table;

use crate::error::CliError;

/// Everything a command produces; nothing touches the disk until [`ReportBundle::write`].
#[derive(Debug)]
pub struct ReportBundle {
    pub command: &'static str,
    /// Resolved configuration, echoed into the summary.
    pub config: Table,
    /// File name and contents, written in this order.
    pub tables: Vec<(String, Vec<u8>)>,
    pub summary: Table,
    pub warnings: Vec<String>,
}

impl ReportBundle {
    pub fn new(command: &'static str, config: &impl Serialize) -> Self {
        Self {
            command,
            config: Table::try_from(config).unwrap_or_default(),
            tables: Vec::new(),
            summary: Table::new(),
            warnings: Vec::new(),
        }
    }

    pub fn table(
        &mut self,
        name: impl Into<String>,
        write: impl FnOnce(&mut Vec<u8>) -> gabor_phase::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.tables.push((name.into(), buf));
        Ok(())
    }

    /// Serializes `rows` with a header taken from the field names.
    pub fn rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        self.table(name, |buf| {
            let mut wr = csv::Writer::from_writer(buf);
            let err = |e: csv::Error| gabor_phase::Error::Parse {
                context: "report csv".into(),
                message: e.to_string(),
            };
            for r in rows {
                wr.serialize(r).map_err(err)?;
            }
            wr.flush()?;
            Ok(())
        })
    }

    pub fn set(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub fn write(&self, dir: &Path, wall: Duration) -> Result<(), CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, bytes) in &self.tables {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(io(&path))?;
        }
        let mut run = Table::new();
        run.insert("command".into(), self.command.into());
        run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        run.insert("wall_time_s".into(), wall.as_secs_f64().into());
        run.insert(
            "tables".into(),
            toml::Value::Array(self.tables.iter().map(|(n, _)| n.clone().into()).collect()),
        );
        let mut doc = Table::new();
        doc.insert("run".into(), run.into());
        let mut summary = self.summary.clone();
        summary.insert(
            "warnings".into(),
            toml::Value::Array(self.warnings.iter().map(|w| w.clone().into()).collect()),
        );
        doc.insert("summary".into(), summary.into());
        doc.insert("config".into(), self.config.clone().into());
        let path = dir.join("summary.toml");
        let text = toml::to_string(&doc).map_err(|e| CliError::Validation(e.to_string()))?;
        std::fs::write(&path, text).map_err(io(&path))
    }
}
