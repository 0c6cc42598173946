//! Two-bit XOR reward environment.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sample {
    x: [bool; 2],
    target: bool,
}

impl Sample {
    pub fn new(x: [bool; 2]) -> Self {
        Self { x, target: x[0] ^ x[1] }
    }

    pub fn x(&self) -> [bool; 2] {
        self.x
    }

    pub fn target(&self) -> bool {
        self.target
    }

    /// The four input patterns in truth-table order.
    pub fn all() -> [Sample; 4] {
        [
            Sample::new([false, false]),
            Sample::new([false, true]),
            Sample::new([true, false]),
            Sample::new([true, true]),
        ]
    }
}

/// Uniform i.i.d. pattern.
pub fn sample_input<R: Rng + ?Sized>(rng: &mut R) -> Sample {
    Sample::all()[rng.gen_range(0..4)]
}

/// 1 if the emitted bit matches the target, else 0.
#[inline]
pub fn reward(y: bool, target: bool) -> u8 {
    (y == target) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Presentation {
    #[default]
    Uniform,
    /// (0,0), (0,1), (1,0), (1,1), repeating.
    Cyclic,
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Presentation::Uniform => "uniform",
            Presentation::Cyclic => "cyclic",
        })
    }
}

impl FromStr for Presentation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Presentation::Uniform),
            "cyclic" => Ok(Presentation::Cyclic),
            other => Err(format!("unknown presentation `{other}` (expected uniform|cyclic)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct XorEnv {
    presentation: Presentation,
    cursor: usize,
}

impl XorEnv {
    pub fn new(presentation: Presentation) -> Self {
        Self { presentation, cursor: 0 }
    }

    pub fn next_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Sample {
        match self.presentation {
            Presentation::Uniform => sample_input(rng),
            Presentation::Cyclic => {
                let s = Sample::all()[self.cursor % 4];
                self.cursor += 1;
                s
            }
        }
    }
}
