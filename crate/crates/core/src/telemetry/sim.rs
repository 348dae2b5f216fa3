//! Simulated sensor nodes.
//!
//! Each node emits readings on a fixed period starting from a configured
//! timestamp. A generated value is
//! `base + amplitude * sin(2*pi * time_of_day) + gaussian(noise_std)`,
//! clamped to the sensor envelope, so streams are deterministic given their
//! seeds.
//!
//! Profile file format, one node block per `node` directive:
//!
//! ```text
//! node esp32-1
//! period 3600
//! start 1711324800
//! env 24 3 0.5 55 8 1.5 7
//! spectral 1200 300 40 11
//! distance lidar 22 0 0.4 13
//! ```
//!
//! Generator lines end with the generator's seed. `env` takes
//! `temp_base temp_amp temp_noise hum_base hum_amp hum_noise seed`;
//! `spectral` takes `base amp noise seed` (applied to all ten channels);
//! `distance` takes `sensor base amp noise seed`.

use std::io::{BufWriter, Write};
use std::net::{SocketAddr, TcpStream};
use std::thread;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::telemetry::wire::{
    encode_reading, DistanceSensor, Payload, SensorReading, ENV_HUMIDITY_RANGE_PCT,
    ENV_TEMPERATURE_RANGE_C, SPECTRAL_CHANNELS,
};

const CONNECT_ATTEMPTS: usize = 8;
const CONNECT_BACKOFF_START: Duration = Duration::from_millis(25);

/// Base value plus diurnal sinusoid plus gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    pub base: f64,
    pub diurnal_amplitude: f64,
    pub noise_std: f64,
}

impl Waveform {
    fn value(&self, timestamp: i64, rng: &mut SplitMix64) -> f64 {
        let day_fraction = timestamp.rem_euclid(86_400) as f64 / 86_400.0;
        let diurnal = self.diurnal_amplitude * (std::f64::consts::TAU * day_fraction).sin();
        let noise = if self.noise_std > 0.0 {
            self.noise_std * rng.next_gaussian()
        } else {
            0.0
        };
        self.base + diurnal + noise
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    Env {
        temperature: Waveform,
        humidity: Waveform,
    },
    Spectral {
        channels: Waveform,
    },
    Distance {
        sensor: DistanceSensor,
        distance: Waveform,
    },
}

/// One value generator with its own seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub seed: u64,
}

/// A simulated node: identity, cadence, and its generators.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProfile {
    pub node_id: String,
    pub period_secs: u64,
    pub start_timestamp: i64,
    pub generators: Vec<Generator>,
}

fn clamp(value: f64, (min, max): (f64, f64)) -> f64 {
    value.clamp(min, max)
}

impl NodeProfile {
    /// Deterministically generates `count` readings. Ticks advance by the
    /// period; each tick emits one reading per generator (in profile order)
    /// until the count is reached. Values are clamped to the envelope, so
    /// every emitted reading is valid.
    pub fn generate(&self, count: usize) -> Vec<SensorReading> {
        let mut rngs: Vec<SplitMix64> = self
            .generators
            .iter()
            .map(|g| SplitMix64::new(g.seed))
            .collect();
        let mut out = Vec::with_capacity(count);
        let mut tick: u64 = 0;
        while out.len() < count {
            let timestamp = self.start_timestamp + (tick * self.period_secs) as i64;
            for (generator, rng) in self.generators.iter().zip(&mut rngs) {
                if out.len() == count {
                    break;
                }
                let payload = match &generator.kind {
                    GeneratorKind::Env {
                        temperature,
                        humidity,
                    } => Payload::Env {
                        temperature_c: clamp(
                            temperature.value(timestamp, rng),
                            ENV_TEMPERATURE_RANGE_C,
                        ),
                        humidity_pct: clamp(humidity.value(timestamp, rng), ENV_HUMIDITY_RANGE_PCT),
                    },
                    GeneratorKind::Spectral { channels } => {
                        let mut values = [0.0; SPECTRAL_CHANNELS];
                        for v in &mut values {
                            *v = channels.value(timestamp, rng).max(0.0);
                        }
                        Payload::Spectral { channels: values }
                    }
                    GeneratorKind::Distance { sensor, distance } => Payload::Distance {
                        centimeters: clamp(distance.value(timestamp, rng), sensor.range_cm()),
                        sensor: *sensor,
                    },
                };
                out.push(SensorReading {
                    node_id: self.node_id.clone(),
                    timestamp,
                    payload,
                });
            }
            tick += 1;
        }
        out
    }

    /// Parses the profile file format described in the module docs.
    pub fn parse_profiles(text: &str) -> Result<Vec<NodeProfile>> {
        let mut profiles: Vec<NodeProfile> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let err = |reason: String| Error::Format {
                what: "node profile",
                line: lineno,
                reason,
            };
            let mut fields = line.split_whitespace();
            let directive = fields.next().unwrap();
            let rest: Vec<&str> = fields.collect();
            let parsef = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("bad number {s:?}")))
            };

            if directive == "node" {
                if rest.len() != 1 {
                    return Err(err("node expects exactly one id".into()));
                }
                profiles.push(NodeProfile {
                    node_id: rest[0].to_string(),
                    period_secs: 3600,
                    start_timestamp: 0,
                    generators: Vec::new(),
                });
                continue;
            }

            let profile = profiles
                .last_mut()
                .ok_or_else(|| err("directive before any `node` line".into()))?;
            match directive {
                "period" => {
                    let [v] = rest[..] else {
                        return Err(err("period expects one value".into()));
                    };
                    profile.period_secs = v
                        .parse::<u64>()
                        .ok()
                        .filter(|&p| p > 0)
                        .ok_or_else(|| err(format!("bad period {v:?}")))?;
                }
                "start" => {
                    let [v] = rest[..] else {
                        return Err(err("start expects one value".into()));
                    };
                    profile.start_timestamp = v
                        .parse()
                        .map_err(|_| err(format!("bad start timestamp {v:?}")))?;
                }
                "env" => {
                    let [tb, ta, tn, hb, ha, hn, seed] = rest[..] else {
                        return Err(err(format!("env expects 7 values, got {}", rest.len())));
                    };
                    profile.generators.push(Generator {
                        kind: GeneratorKind::Env {
                            temperature: Waveform {
                                base: parsef(tb)?,
                                diurnal_amplitude: parsef(ta)?,
                                noise_std: parsef(tn)?,
                            },
                            humidity: Waveform {
                                base: parsef(hb)?,
                                diurnal_amplitude: parsef(ha)?,
                                noise_std: parsef(hn)?,
                            },
                        },
                        seed: seed
                            .parse()
                            .map_err(|_| err(format!("bad seed {seed:?}")))?,
                    });
                }
                "spectral" => {
                    let [b, a, n, seed] = rest[..] else {
                        return Err(err(format!(
                            "spectral expects 4 values, got {}",
                            rest.len()
                        )));
                    };
                    profile.generators.push(Generator {
                        kind: GeneratorKind::Spectral {
                            channels: Waveform {
                                base: parsef(b)?,
                                diurnal_amplitude: parsef(a)?,
                                noise_std: parsef(n)?,
                            },
                        },
                        seed: seed
                            .parse()
                            .map_err(|_| err(format!("bad seed {seed:?}")))?,
                    });
                }
                "distance" => {
                    let [sensor, b, a, n, seed] = rest[..] else {
                        return Err(err(format!(
                            "distance expects 5 values, got {}",
                            rest.len()
                        )));
                    };
                    let sensor = match sensor {
                        "lidar" => DistanceSensor::Lidar,
                        "ultrasonic" => DistanceSensor::Ultrasonic,
                        other => return Err(err(format!("unknown sensor {other:?}"))),
                    };
                    profile.generators.push(Generator {
                        kind: GeneratorKind::Distance {
                            sensor,
                            distance: Waveform {
                                base: parsef(b)?,
                                diurnal_amplitude: parsef(a)?,
                                noise_std: parsef(n)?,
                            },
                        },
                        seed: seed
                            .parse()
                            .map_err(|_| err(format!("bad seed {seed:?}")))?,
                    });
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        for (i, p) in profiles.iter().enumerate() {
            if p.generators.is_empty() {
                return Err(Error::Format {
                    what: "node profile",
                    line: 0,
                    reason: format!("node #{} ({}) has no generators", i + 1, p.node_id),
                });
            }
        }
        if profiles.is_empty() {
            return Err(Error::Format {
                what: "node profile",
                line: 0,
                reason: "no node blocks found".into(),
            });
        }
        Ok(profiles)
    }
}

fn connect_with_retry(addr: SocketAddr) -> Result<TcpStream> {
    let mut delay = CONNECT_BACKOFF_START;
    let mut last = String::new();
    for attempt in 0..CONNECT_ATTEMPTS {
        match TcpStream::connect(addr) {
            Ok(stream) => return Ok(stream),
            Err(e) => {
                last = e.to_string();
                if attempt + 1 < CONNECT_ATTEMPTS {
                    thread::sleep(delay);
                    delay = (delay * 2).min(Duration::from_millis(400));
                }
            }
        }
    }
    Err(Error::ConnectFailed {
        addr: addr.to_string(),
        attempts: CONNECT_ATTEMPTS,
        last,
    })
}

/// Connects to the server (with bounded retry) and streams `count` readings
/// generated from the profile. Returns the number of lines written.
pub fn simulate_node(addr: SocketAddr, profile: &NodeProfile, count: usize) -> Result<usize> {
    let readings = profile.generate(count);
    let stream = connect_with_retry(addr)?;
    let mut writer = BufWriter::new(stream);
    for reading in &readings {
        writer.write_all(encode_reading(reading)?.as_bytes())?;
    }
    writer.flush()?;
    Ok(readings.len())
}

/// Streams several nodes over a single connection, profile by profile.
///
/// One connection means one server-side reader, so the persisted order is
/// exactly the emission order; separate connections only guarantee
/// *per-node* order. Returns `(node_id, lines sent)` per profile.
pub fn simulate_nodes_sequential(
    addr: SocketAddr,
    profiles: &[NodeProfile],
    count: usize,
) -> Result<Vec<(String, usize)>> {
    let stream = connect_with_retry(addr)?;
    let mut writer = BufWriter::new(stream);
    let mut sent = Vec::with_capacity(profiles.len());
    for profile in profiles {
        let readings = profile.generate(count);
        for reading in &readings {
            writer.write_all(encode_reading(reading)?.as_bytes())?;
        }
        sent.push((profile.node_id.clone(), readings.len()));
    }
    writer.flush()?;
    Ok(sent)
}
