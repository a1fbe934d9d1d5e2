use std::io::Write;

use serde_json::Value;

use crate::opts::CliResult;

pub fn json_line(out: &mut impl Write, v: &Value) -> CliResult<()> {
    writeln!(out, "{}", serde_json::to_string(v).expect("values serialize"))?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_row<S: AsRef<str>>(out: &mut impl Write, fields: &[S]) -> CliResult<()> {
    let line: Vec<String> = fields.iter().map(|f| csv_field(f.as_ref())).collect();
    writeln!(out, "{}", line.join(","))?;
    Ok(())
}
