//! Telemetry wire format.
//!
//! One reading per line, UTF-8, newline-terminated, tab-separated:
//!
//! ```text
//! <node_id> TAB <unix_seconds> TAB <kind> TAB <kind-specific fields...>
//! ```
//!
//! Kinds and their field order:
//!
//! * `env`: temperature in deg C, relative humidity in %.
//! * `spectral`: the ten channel counts F1..F8, Clear, NIR.
//! * `distance`: centimeters, then the sensor tag (`lidar` or `ultrasonic`).
//!
//! Floats use `.` decimals in shortest round-trip form, so
//! `decode(encode(r)) == r` bit-exactly. Decoding validates every envelope
//! invariant; nothing out of range reaches a sink.

use std::fmt;

use crate::error::{Error, Result};

/// DHT11 operating envelope.
pub const ENV_TEMPERATURE_RANGE_C: (f64, f64) = (0.0, 50.0);
pub const ENV_HUMIDITY_RANGE_PCT: (f64, f64) = (20.0, 90.0);
/// TF-Luna rated range.
pub const LIDAR_RANGE_CM: (f64, f64) = (20.0, 800.0);
/// HC-SR04 rated range.
pub const ULTRASONIC_RANGE_CM: (f64, f64) = (2.0, 400.0);

/// AS7341 channel count (F1-F8, Clear, NIR).
pub const SPECTRAL_CHANNELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceSensor {
    Lidar,
    Ultrasonic,
}

impl DistanceSensor {
    pub fn tag(self) -> &'static str {
        match self {
            DistanceSensor::Lidar => "lidar",
            DistanceSensor::Ultrasonic => "ultrasonic",
        }
    }

    pub fn range_cm(self) -> (f64, f64) {
        match self {
            DistanceSensor::Lidar => LIDAR_RANGE_CM,
            DistanceSensor::Ultrasonic => ULTRASONIC_RANGE_CM,
        }
    }
}

/// Kind-specific payload of a reading.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Env {
        temperature_c: f64,
        humidity_pct: f64,
    },
    Spectral {
        channels: [f64; SPECTRAL_CHANNELS],
    },
    Distance {
        centimeters: f64,
        sensor: DistanceSensor,
    },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Env { .. } => "env",
            Payload::Spectral { .. } => "spectral",
            Payload::Distance { .. } => "distance",
        }
    }
}

/// One timestamped telemetry message.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorReading {
    pub node_id: String,
    pub timestamp: i64,
    pub payload: Payload,
}

/// Why a line was rejected at the wire boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    MissingFields {
        got: usize,
    },
    BadNodeId,
    BadTimestamp {
        field: String,
    },
    UnknownKind {
        kind: String,
    },
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    BadNumber {
        field: &'static str,
        value: String,
    },
    OutOfRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    UnknownSensor {
        tag: String,
    },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::MissingFields { got } => {
                write!(f, "expected at least 3 tab-separated fields, got {got}")
            }
            RejectReason::BadNodeId => write!(f, "node id is empty or contains control characters"),
            RejectReason::BadTimestamp { field } => write!(f, "bad timestamp {field:?}"),
            RejectReason::UnknownKind { kind } => write!(f, "unknown kind {kind:?}"),
            RejectReason::Arity {
                kind,
                expected,
                got,
            } => {
                write!(f, "arity: {kind} expects {expected} fields, got {got}")
            }
            RejectReason::BadNumber { field, value } => {
                write!(f, "bad number for {field}: {value:?}")
            }
            RejectReason::OutOfRange {
                field,
                value,
                min,
                max,
            } => {
                write!(f, "{field} out of range [{min}, {max}]: {value}")
            }
            RejectReason::UnknownSensor { tag } => write!(f, "unknown distance sensor {tag:?}"),
        }
    }
}

fn valid_node_id(node_id: &str) -> bool {
    !node_id.is_empty() && !node_id.chars().any(|c| c == '\t' || c == '\n' || c == '\r')
}

fn check_range(
    field: &'static str,
    value: f64,
    (min, max): (f64, f64),
) -> std::result::Result<(), RejectReason> {
    if value.is_finite() && value >= min && value <= max {
        Ok(())
    } else {
        Err(RejectReason::OutOfRange {
            field,
            value,
            min,
            max,
        })
    }
}

impl SensorReading {
    /// Checks every envelope invariant.
    pub fn validate(&self) -> std::result::Result<(), RejectReason> {
        if !valid_node_id(&self.node_id) {
            return Err(RejectReason::BadNodeId);
        }
        match &self.payload {
            Payload::Env {
                temperature_c,
                humidity_pct,
            } => {
                check_range("temperature", *temperature_c, ENV_TEMPERATURE_RANGE_C)?;
                check_range("humidity", *humidity_pct, ENV_HUMIDITY_RANGE_PCT)?;
            }
            Payload::Spectral { channels } => {
                for (i, &c) in channels.iter().enumerate() {
                    if !(c.is_finite() && c >= 0.0) {
                        return Err(RejectReason::OutOfRange {
                            field: SPECTRAL_FIELDS[i],
                            value: c,
                            min: 0.0,
                            max: f64::INFINITY,
                        });
                    }
                }
            }
            Payload::Distance {
                centimeters,
                sensor,
            } => {
                check_range("distance", *centimeters, sensor.range_cm())?;
            }
        }
        Ok(())
    }
}

const SPECTRAL_FIELDS: [&str; SPECTRAL_CHANNELS] = [
    "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "clear", "nir",
];

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Encodes a reading as one newline-terminated wire line.
pub fn encode_reading(reading: &SensorReading) -> Result<String> {
    if !valid_node_id(&reading.node_id) {
        return Err(Error::InvalidNodeId {
            node_id: reading.node_id.clone(),
        });
    }
    reading.validate().map_err(Error::InvalidReading)?;
    let mut line = format!(
        "{}\t{}\t{}",
        reading.node_id,
        reading.timestamp,
        reading.payload.kind()
    );
    match &reading.payload {
        Payload::Env {
            temperature_c,
            humidity_pct,
        } => {
            line.push('\t');
            line.push_str(&fmt_f64(*temperature_c));
            line.push('\t');
            line.push_str(&fmt_f64(*humidity_pct));
        }
        Payload::Spectral { channels } => {
            for c in channels {
                line.push('\t');
                line.push_str(&fmt_f64(*c));
            }
        }
        Payload::Distance {
            centimeters,
            sensor,
        } => {
            line.push('\t');
            line.push_str(&fmt_f64(*centimeters));
            line.push('\t');
            line.push_str(sensor.tag());
        }
    }
    line.push('\n');
    Ok(line)
}

/// Decodes and validates one wire line (with or without the trailing newline).
pub fn decode_reading(line: &str) -> Result<SensorReading> {
    let trimmed = line.strip_suffix('\n').unwrap_or(line);
    let trimmed = trimmed.strip_suffix('\r').unwrap_or(trimmed);
    let reject = |reason: RejectReason| Error::Reject {
        reason,
        line: trimmed.to_string(),
    };

    let fields: Vec<&str> = trimmed.split('\t').collect();
    if fields.len() < 3 {
        return Err(reject(RejectReason::MissingFields { got: fields.len() }));
    }
    let node_id = fields[0];
    if !valid_node_id(node_id) {
        return Err(reject(RejectReason::BadNodeId));
    }
    let timestamp: i64 = fields[1].parse().map_err(|_| {
        reject(RejectReason::BadTimestamp {
            field: fields[1].to_string(),
        })
    })?;

    let kind = fields[2];
    let rest = &fields[3..];
    let parse_field = |field: &'static str, s: &str| -> std::result::Result<f64, RejectReason> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(RejectReason::BadNumber {
                field,
                value: s.to_string(),
            }),
        }
    };

    let payload = match kind {
        "env" => {
            if rest.len() != 2 {
                return Err(reject(RejectReason::Arity {
                    kind: "env",
                    expected: 2,
                    got: rest.len(),
                }));
            }
            Payload::Env {
                temperature_c: parse_field("temperature", rest[0]).map_err(&reject)?,
                humidity_pct: parse_field("humidity", rest[1]).map_err(&reject)?,
            }
        }
        "spectral" => {
            if rest.len() != SPECTRAL_CHANNELS {
                return Err(reject(RejectReason::Arity {
                    kind: "spectral",
                    expected: SPECTRAL_CHANNELS,
                    got: rest.len(),
                }));
            }
            let mut channels = [0.0; SPECTRAL_CHANNELS];
            for (i, s) in rest.iter().enumerate() {
                channels[i] = parse_field(SPECTRAL_FIELDS[i], s).map_err(&reject)?;
            }
            Payload::Spectral { channels }
        }
        "distance" => {
            if rest.len() != 2 {
                return Err(reject(RejectReason::Arity {
                    kind: "distance",
                    expected: 2,
                    got: rest.len(),
                }));
            }
            let sensor = match rest[1] {
                "lidar" => DistanceSensor::Lidar,
                "ultrasonic" => DistanceSensor::Ultrasonic,
                other => {
                    return Err(reject(RejectReason::UnknownSensor {
                        tag: other.to_string(),
                    }))
                }
            };
            Payload::Distance {
                centimeters: parse_field("distance", rest[0]).map_err(&reject)?,
                sensor,
            }
        }
        other => {
            return Err(reject(RejectReason::UnknownKind {
                kind: other.to_string(),
            }))
        }
    };

    let reading = SensorReading {
        node_id: node_id.to_string(),
        timestamp,
        payload,
    };
    reading.validate().map_err(reject)?;
    Ok(reading)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(node: &str, ts: i64, t: f64, h: f64) -> SensorReading {
        SensorReading {
            node_id: node.to_string(),
            timestamp: ts,
            payload: Payload::Env {
                temperature_c: t,
                humidity_pct: h,
            },
        }
    }

    #[test]
    fn env_encoding_matches_documented_example() {
        let line = encode_reading(&env("esp32-1", 1_711_929_600, 24.5, 55.0)).unwrap();
        assert_eq!(line, "esp32-1\t1711929600\tenv\t24.5\t55.0\n");
    }

    #[test]
    fn distance_encoding_carries_sensor_tag() {
        let r = SensorReading {
            node_id: "rig".into(),
            timestamp: 10,
            payload: Payload::Distance {
                centimeters: 22.0,
                sensor: DistanceSensor::Lidar,
            },
        };
        let line = encode_reading(&r).unwrap();
        assert_eq!(line, "rig\t10\tdistance\t22.0\tlidar\n");
        assert_eq!(decode_reading(&line).unwrap(), r);
    }

    #[test]
    fn roundtrip_each_kind() {
        let readings = vec![
            env("a", 0, 0.0, 20.0),
            env("b", -5, 50.0, 90.0),
            SensorReading {
                node_id: "spec".into(),
                timestamp: 99,
                payload: Payload::Spectral {
                    channels: [0.5, 1.0, 2.25, 3.0, 4.0, 5.5, 6.0, 7.0, 1000.0, 0.0],
                },
            },
            SensorReading {
                node_id: "us-1".into(),
                timestamp: 7,
                payload: Payload::Distance {
                    centimeters: 399.5,
                    sensor: DistanceSensor::Ultrasonic,
                },
            },
        ];
        for r in readings {
            let line = encode_reading(&r).unwrap();
            assert_eq!(decode_reading(&line).unwrap(), r, "line {line:?}");
            // Canonical line survives a decode/encode cycle byte-for-byte.
            assert_eq!(
                encode_reading(&decode_reading(&line).unwrap()).unwrap(),
                line
            );
        }
    }

    #[test]
    fn humidity_above_envelope_rejected() {
        let err = decode_reading("n\t0\tenv\t24.0\t95.0").unwrap_err();
        match err {
            Error::Reject {
                reason: RejectReason::OutOfRange { field, .. },
                ..
            } => {
                assert_eq!(field, "humidity");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spectral_arity_enforced() {
        let line = "n\t0\tspectral\t1\t2\t3\t4\t5\t6\t7\t8\t9";
        match decode_reading(line).unwrap_err() {
            Error::Reject {
                reason:
                    RejectReason::Arity {
                        kind,
                        expected,
                        got,
                    },
                ..
            } => {
                assert_eq!((kind, expected, got), ("spectral", 10, 9));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_and_sensor_rejected() {
        assert!(matches!(
            decode_reading("n\t0\tsoil\t1.0"),
            Err(Error::Reject {
                reason: RejectReason::UnknownKind { .. },
                ..
            })
        ));
        assert!(matches!(
            decode_reading("n\t0\tdistance\t30.0\tsonar"),
            Err(Error::Reject {
                reason: RejectReason::UnknownSensor { .. },
                ..
            })
        ));
    }

    #[test]
    fn malformed_numbers_rejected() {
        assert!(decode_reading("n\t0\tenv\tx\t50.0").is_err());
        assert!(decode_reading("n\t0\tenv\tinf\t50.0").is_err());
        assert!(decode_reading("n\tzz\tenv\t24.0\t50.0").is_err());
        assert!(decode_reading("one field").is_err());
    }

    #[test]
    fn distance_envelopes_differ_by_sensor() {
        // 10 cm is valid for ultrasonic but below the lidar floor.
        assert!(decode_reading("n\t0\tdistance\t10.0\tultrasonic").is_ok());
        assert!(decode_reading("n\t0\tdistance\t10.0\tlidar").is_err());
        assert!(decode_reading("n\t0\tdistance\t500.0\tlidar").is_ok());
        assert!(decode_reading("n\t0\tdistance\t500.0\tultrasonic").is_err());
    }

    #[test]
    fn bad_node_ids_rejected_on_encode() {
        for id in ["", "tab\there", "new\nline"] {
            let r = env(id, 0, 24.0, 50.0);
            assert!(
                matches!(encode_reading(&r), Err(Error::InvalidNodeId { .. })),
                "{id:?}"
            );
        }
    }

    #[test]
    fn out_of_envelope_rejected_on_encode_too() {
        let r = env("n", 0, 99.0, 50.0);
        assert!(matches!(encode_reading(&r), Err(Error::InvalidReading(_))));
    }
}
