//! Line-oriented reports: CSV tables, notes and assertions.
//!
//! ```text
//! # title
//! [table name]
//! col_a,col_b
//! 1,2
//! note,<text>
//! assert,<name>,PASS,<detail>
//! ```

use std::fmt::{self, Write as _};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    /// Cells of column `name`.
    pub fn column(&self, name: &str) -> Vec<&str> {
        let i = self.header.iter().position(|h| h == name).expect("known column");
        self.rows.iter().map(|r| r[i].as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub title: String,
    pub tables: Vec<Table>,
    pub summary: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub asserts: Vec<Assertion>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn find_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) -> bool {
        self.asserts.push(Assertion { name: name.into(), pass, detail: detail.into() });
        pass
    }

    pub fn all_pass(&self) -> bool {
        self.asserts.iter().all(|a| a.pass)
    }

    /// Process exit code: 0 when every assertion passed.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        writeln!(s, "# {}", self.title)?;
        for t in &self.tables {
            writeln!(s, "[{}]", t.name)?;
            writeln!(s, "{}", t.header.join(","))?;
            for r in &t.rows {
                writeln!(s, "{}", r.join(","))?;
            }
        }
        if !self.summary.is_empty() {
            writeln!(s, "[summary]")?;
            for (k, v) in &self.summary {
                writeln!(s, "{k},{v}")?;
            }
        }
        for n in &self.notes {
            writeln!(s, "note,{n}")?;
        }
        for a in &self.asserts {
            writeln!(s, "assert,{},{},{}", a.name, if a.pass { "PASS" } else { "FAIL" }, a.detail)?;
        }
        f.write_str(&s)
    }
}

/// Fixed-precision float for stable output.
pub fn num(x: f64, places: usize) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.places$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_layout() {
        let mut r = Report::new("t");
        let mut t = Table::new("x", &["a", "b"]);
        t.push([1, 2]);
        r.table(t);
        r.summary("k", 3);
        r.note("hello");
        r.check("ok", true, "fine");
        assert_eq!(r.render(), "# t\n[x]\na,b\n1,2\n[summary]\nk,3\nnote,hello\nassert,ok,PASS,fine\n");
        assert_eq!(r.exit_code(), 0);
        r.check("bad", false, "");
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.find_table("x").unwrap().column("b"), vec!["2"]);
    }

    #[test]
    fn num_formats() {
        assert_eq!(num(0.4360, 4), "0.4360");
        assert_eq!(num(f64::INFINITY, 2), "inf");
    }
}
