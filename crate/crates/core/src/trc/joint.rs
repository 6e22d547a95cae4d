use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

macro_rules! joints {
    ($($variant:ident),+ $(,)?) => {
        /// The 25 skeletal joints tracked by a Kinect v2 sensor.
        #[derive(Debug, Clone, PartialEq, Eq, Hash)]
        pub enum JointId {
            $($variant,)+
            Unknown(String),
        }

        impl JointId {
            pub const TRACKED: [JointId; 25] = [$(JointId::$variant,)+];

            pub fn name(&self) -> &str {
                match self {
                    $(JointId::$variant => stringify!($variant),)+
                    JointId::Unknown(name) => name,
                }
            }
        }
    };
}

joints!(
    SpineBase,
    SpineMid,
    Neck,
    Head,
    ShoulderLeft,
    ElbowLeft,
    WristLeft,
    HandLeft,
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    HipLeft,
    KneeLeft,
    AnkleLeft,
    FootLeft,
    HipRight,
    KneeRight,
    AnkleRight,
    FootRight,
    SpineShoulder,
    HandTipLeft,
    ThumbLeft,
    HandTipRight,
    ThumbRight,
);

/// Lowercase alphanumerics only, so "Hand Right", "hand_right" and
/// "HandRight" compare equal.
pub(crate) fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl JointId {
    /// Resolve a marker name. Never fails; unrecognised names become
    /// `Unknown` with the name kept verbatim.
    pub fn from_marker_name(name: &str) -> Self {
        let key = normalize_name(name);
        Self::TRACKED
            .iter()
            .find(|j| normalize_name(j.name()) == key)
            .cloned()
            .unwrap_or_else(|| JointId::Unknown(name.to_string()))
    }

    /// Whether this joint refers to the marker called `marker`.
    pub fn matches(&self, marker: &str) -> bool {
        normalize_name(self.name()) == normalize_name(marker)
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointId {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Self::from_marker_name(s))
    }
}

impl Serialize for JointId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for JointId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Self::from_marker_name(&s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis {other:?}")),
        }
    }
}
