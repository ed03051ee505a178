//! CSV and JSON writers.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use infomenu_core::binary::BinaryMenu;
use serde::Serialize;

use crate::CliError;

/// 17 significant digits, so values survive a round trip.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.16e}", x + 0.0)
    }
}

pub struct Table {
    writer: csv::Writer<Box<dyn Write>>,
}

impl Table {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let file: Box<dyn Write> = Box::new(File::create(path)?);
        Self::from_writer(file, header)
    }

    pub fn from_writer(out: Box<dyn Write>, header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(header)?;
        Ok(Table { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct MenuJson {
    #[serde(rename = "I_low")]
    i_low: f64,
    #[serde(rename = "I_high")]
    i_high: f64,
    t_low: f64,
    t_high: f64,
    profit: f64,
}

pub fn write_menu_json(path: &Path, menu: &BinaryMenu) -> Result<(), CliError> {
    let json = MenuJson {
        i_low: menu.i_low,
        i_high: menu.i_high,
        t_low: menu.t_low,
        t_high: menu.t_high,
        profit: menu.expected_profit,
    };
    let mut text = serde_json::to_string_pretty(&json)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
