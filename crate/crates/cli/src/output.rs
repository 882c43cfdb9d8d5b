use crate::error::CliError;

/// Full-precision scientific notation (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table preceded by a `# ...` provenance line.
pub struct Table {
    comment: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(comment: String, columns: Vec<String>) -> Self {
        Table {
            comment,
            columns,
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn comment_line(&self) -> String {
        format!("# {}\n", self.comment)
    }

    pub fn render(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(self.comment_line().into_bytes());
        let fail = |e: csv::Error| CliError::Usage(format!("cannot write CSV: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Usage(format!("cannot write CSV: {e}")))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
    }
}
