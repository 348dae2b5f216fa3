//! Append-only persistence of readings and plant records.
//!
//! Readings files hold one wire-format line per reading. Plant records live
//! in a CSV with a fixed header. Both loaders skip a partial trailing line
//! (the footprint of a crash mid-append) with a warning, but treat a corrupt
//! interior line as a hard error carrying its line number.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::date::Date;
use crate::error::{Error, Result};
use crate::telemetry::server::ReadingSink;
use crate::telemetry::wire::{decode_reading, encode_reading, SensorReading};

/// CSV header of the plants file.
pub const PLANTS_CSV_HEADER: &str =
    "plant_id,date,measured_distance_cm,leaf_area_cm2,measured_weight_g,actual_weight_g";

/// One plant-day observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantRecord {
    pub plant_id: String,
    pub date: Date,
    pub measured_distance_cm: f64,
    pub leaf_area_cm2: f64,
    pub measured_weight_g: f64,
    pub actual_weight_g: f64,
}

impl PlantRecord {
    pub fn new(
        plant_id: impl Into<String>,
        date: Date,
        measured_distance_cm: f64,
        leaf_area_cm2: f64,
        measured_weight_g: f64,
        actual_weight_g: f64,
    ) -> Result<Self> {
        let record = PlantRecord {
            plant_id: plant_id.into(),
            date,
            measured_distance_cm,
            leaf_area_cm2,
            measured_weight_g,
            actual_weight_g,
        };
        record.validate()?;
        Ok(record)
    }

    fn validate(&self) -> Result<()> {
        if self.plant_id.is_empty() || self.plant_id.contains(',') || self.plant_id.contains('\n') {
            return Err(Error::Degenerate(format!(
                "invalid plant id {:?}",
                self.plant_id
            )));
        }
        if !(self.measured_distance_cm > 0.0 && self.measured_distance_cm.is_finite()) {
            return Err(Error::NonPositive {
                name: "measured_distance",
                value: self.measured_distance_cm,
            });
        }
        if !(self.leaf_area_cm2 >= 0.0 && self.leaf_area_cm2.is_finite()) {
            return Err(Error::NonPositive {
                name: "leaf_area",
                value: self.leaf_area_cm2,
            });
        }
        if !(self.actual_weight_g >= 0.0 && self.actual_weight_g.is_finite()) {
            return Err(Error::NonPositive {
                name: "actual_weight",
                value: self.actual_weight_g,
            });
        }
        // actual = measured - tare with tare >= 0.
        if self.actual_weight_g > self.measured_weight_g {
            return Err(Error::TareExceedsMeasured {
                measured_g: self.measured_weight_g,
                tare_g: self.measured_weight_g - self.actual_weight_g,
            });
        }
        Ok(())
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:?},{:?},{:?},{:?}",
            self.plant_id,
            self.date,
            self.measured_distance_cm,
            self.leaf_area_cm2,
            self.measured_weight_g,
            self.actual_weight_g
        )
    }

    pub fn parse_csv_row(row: &str) -> Result<Self> {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Degenerate(format!(
                "expected 6 CSV fields, got {}",
                fields.len()
            )));
        }
        let num = |s: &str, name: &'static str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Degenerate(format!("bad number for {name}: {s:?}")))
        };
        PlantRecord::new(
            fields[0],
            fields[1].parse()?,
            num(fields[2], "measured_distance")?,
            num(fields[3], "leaf_area")?,
            num(fields[4], "measured_weight")?,
            num(fields[5], "actual_weight")?,
        )
    }
}

/// Subtracts the known container weight from the scale reading.
pub fn tare_adjust(measured_g: f64, tare_g: f64) -> Result<f64> {
    if !(tare_g >= 0.0 && tare_g.is_finite()) {
        return Err(Error::NonPositive {
            name: "tare",
            value: tare_g,
        });
    }
    let actual = measured_g - tare_g;
    if actual < 0.0 {
        return Err(Error::TareExceedsMeasured { measured_g, tare_g });
    }
    Ok(actual)
}

/// File-backed reading sink; appends one wire line per reading.
pub struct FileStore {
    writer: BufWriter<File>,
}

impl FileStore {
    pub fn open_append(path: impl AsRef<Path>) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(FileStore {
            writer: BufWriter::new(file),
        })
    }
}

impl ReadingSink for FileStore {
    fn append(&mut self, reading: SensorReading) -> Result<()> {
        self.writer
            .write_all(encode_reading(&reading)?.as_bytes())?;
        self.writer.flush()?;
        Ok(())
    }
}

/// Appends one reading, opening and closing the file.
pub fn append_reading(path: impl AsRef<Path>, reading: &SensorReading) -> Result<()> {
    let mut store = FileStore::open_append(path)?;
    store.append(reading.clone())
}

/// Readings loaded from a store file, in append order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingLog {
    pub readings: Vec<SensorReading>,
    /// 1 if a partial trailing line was skipped, else 0.
    pub skipped_partial: usize,
}

pub fn load_readings(path: impl AsRef<Path>) -> Result<ReadingLog> {
    let path = path.as_ref();
    let (lines, skipped_partial) = read_complete_lines(path)?;
    let mut readings = Vec::with_capacity(lines.len());
    for (idx, line) in lines.iter().enumerate() {
        let reading = decode_reading(line).map_err(|e| Error::StoreLine {
            path: path.to_path_buf(),
            line: idx + 1,
            reason: e.to_string(),
        })?;
        readings.push(reading);
    }
    Ok(ReadingLog {
        readings,
        skipped_partial,
    })
}

/// Appends one plant record, writing the CSV header first when the file is
/// new or empty.
pub fn append_plant_record(path: impl AsRef<Path>, record: &PlantRecord) -> Result<()> {
    let path = path.as_ref();
    let needs_header = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = BufWriter::new(file);
    if needs_header {
        writeln!(writer, "{PLANTS_CSV_HEADER}")?;
    }
    writeln!(writer, "{}", record.to_csv_row())?;
    writer.flush()?;
    Ok(())
}

/// Plant records loaded from a CSV, in append order.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantLog {
    pub records: Vec<PlantRecord>,
    pub skipped_partial: usize,
}

pub fn load_plant_records(path: impl AsRef<Path>) -> Result<PlantLog> {
    let path = path.as_ref();
    let (lines, skipped_partial) = read_complete_lines(path)?;
    let mut lines = lines.into_iter().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == PLANTS_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(Error::StoreLine {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("unexpected header {header:?}"),
            })
        }
        None => {
            return Ok(PlantLog {
                records: Vec::new(),
                skipped_partial,
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let record = PlantRecord::parse_csv_row(line.trim_end()).map_err(|e| Error::StoreLine {
            path: path.to_path_buf(),
            line: idx + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(PlantLog {
        records,
        skipped_partial,
    })
}

/// Splits a file into newline-terminated lines. A non-empty tail without a
/// final newline is a crash artifact: skipped, warned about, and counted.
fn read_complete_lines(path: &Path) -> Result<(Vec<String>, usize)> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut lines: Vec<String> = text.split('\n').map(str::to_string).collect();
    let tail = lines.pop().unwrap_or_default();
    let skipped = if tail.is_empty() {
        0
    } else {
        eprintln!(
            "{}: skipping partial trailing line ({} bytes)",
            path.display(),
            tail.len()
        );
        1
    };
    Ok((lines, skipped))
}
