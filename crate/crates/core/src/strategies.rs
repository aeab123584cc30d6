//! The built-in transformation strategies and their prompt fragments.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::StrategyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyId {
    Optimization,
    Quality,
    Reusability,
    Security,
    Obfuscation,
    WindowsApi,
}

const OPTIMIZATION: &str = "\
1. Remove code redundancies.
2. Identify performance bottlenecks and fix them.
3. Simplify the code's logic or structure and optimize data structures and algorithms if applicable.
4. Use language-specific features or modern libraries if applicable.";

const QUALITY: &str = "\
1. Check error handling and edge cases.
2. Follow coding practices and style guidelines.
3. Add proper documentation to classes and functions, and comments for complex parts.";

const REUSABILITY: &str = "\
Make the code reusable by dividing supplied functions into smaller function blocks if and where applicable. \
The smaller functions should be called inside the respective supplied functions as needed.";

const SECURITY: &str = "\
1. Identify security vulnerabilities and fix them.
2. If the function you are modifying contains cryptographic operations, change the cryptographic library used for those operations. \
If no cryptographic operations are present, no changes are necessary.
3. Follow secure coding standards and guidelines.";

const OBFUSCATION: &str = "\
1. Change the given function's and LOCAL variable's names to meaningless, hard-to-understand strings which are not real words. \
DO NOT redefine or rename global variables (given to you) and names of functions that are called inside the given function \
( might be defined elsewhere ) under any circumstances.
However if the given function name is any of `main`, `wmain`, `WinMain`, `wWinMain`, `DllMain`, `_tWinMain`, `_tmain` \
do not change it's name, only change the local variable's names inside the function.
2. Add unnecessary jump instructions, loops, and conditional statements inside the functions.
3. Add unnecessary functions and call those functions inside the original functions.
4. Add anti-debugging techniques to the code.
5. If there are loops/conditional statements in the code change them to their equivalent alternatives and make them more difficult to follow.
6. Incorporate code to the variants that activates under very rare and obscure cases without altering core functionality, \
making the rare code hard to detect during testing.";

const WINDOWS_API: &str = "\
1. Identify all Windows API function calls in the given functions.
2. If there are such function calls, replace each identified Windows API function call with an alternative Windows API \
function call or sequence of calls that achieves the same task.
3. If applicable, use indirect methods or wrappers around the Windows API calls to achieve the same functionality.
4. Ensure that the functionality remains the same after the replacement.";

impl StrategyId {
    pub const ALL: [StrategyId; 6] = [
        StrategyId::Optimization,
        StrategyId::Quality,
        StrategyId::Reusability,
        StrategyId::Security,
        StrategyId::Obfuscation,
        StrategyId::WindowsApi,
    ];

    /// Canonical lowercase token, as accepted on the command line.
    pub fn name(self) -> &'static str {
        match self {
            StrategyId::Optimization => "optimization",
            StrategyId::Quality => "quality",
            StrategyId::Reusability => "reusability",
            StrategyId::Security => "security",
            StrategyId::Obfuscation => "obfuscation",
            StrategyId::WindowsApi => "windows-api",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            StrategyId::Optimization => "Code Optimization",
            StrategyId::Quality => "Code Quality and Reliability",
            StrategyId::Reusability => "Code Reusability",
            StrategyId::Security => "Code Security",
            StrategyId::Obfuscation => "Code Obfuscation",
            StrategyId::WindowsApi => "Windows API-Specific Transformation",
        }
    }

    pub fn fragment(self) -> &'static str {
        match self {
            StrategyId::Optimization => OPTIMIZATION,
            StrategyId::Quality => QUALITY,
            StrategyId::Reusability => REUSABILITY,
            StrategyId::Security => SECURITY,
            StrategyId::Obfuscation => OBFUSCATION,
            StrategyId::WindowsApi => WINDOWS_API,
        }
    }
}

impl FromStr for StrategyId {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let token: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        match token.as_str() {
            "optimization" | "optimisation" => Ok(StrategyId::Optimization),
            "quality" => Ok(StrategyId::Quality),
            "reusability" => Ok(StrategyId::Reusability),
            "security" => Ok(StrategyId::Security),
            "obfuscation" => Ok(StrategyId::Obfuscation),
            "windowsapi" | "windows" => Ok(StrategyId::WindowsApi),
            _ => Err(StrategyError::UnknownStrategy(s.to_string())),
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Identifies either a built-in strategy or a user-defined one from config.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKey {
    Builtin(StrategyId),
    Custom(String),
}

impl StrategyKey {
    pub fn name(&self) -> &str {
        match self {
            StrategyKey::Builtin(id) => id.name(),
            StrategyKey::Custom(name) => name,
        }
    }
}

impl fmt::Display for StrategyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<StrategyId> for StrategyKey {
    fn from(id: StrategyId) -> Self {
        StrategyKey::Builtin(id)
    }
}

impl Serialize for StrategyKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for StrategyKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Ok(match name.parse::<StrategyId>() {
            Ok(id) => StrategyKey::Builtin(id),
            Err(_) => StrategyKey::Custom(name),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub key: StrategyKey,
    pub title: Cow<'static, str>,
    pub fragment: Cow<'static, str>,
}

pub fn get_strategy(id: StrategyId) -> Strategy {
    Strategy {
        key: StrategyKey::Builtin(id),
        title: Cow::Borrowed(id.title()),
        fragment: Cow::Borrowed(id.fragment()),
    }
}

/// Built-in strategies plus any custom `(name, fragment)` pairs from config.
#[derive(Debug, Clone, Default)]
pub struct StrategyCatalog {
    custom: BTreeMap<String, String>,
}

impl StrategyCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_custom(custom: BTreeMap<String, String>) -> Result<Self, StrategyError> {
        let mut catalog = Self::new();
        for (name, fragment) in custom {
            catalog.add_custom(name, fragment)?;
        }
        Ok(catalog)
    }

    pub fn add_custom(
        &mut self,
        name: impl Into<String>,
        fragment: impl Into<String>,
    ) -> Result<(), StrategyError> {
        let name = name.into();
        if name.parse::<StrategyId>().is_ok() {
            return Err(StrategyError::ShadowsBuiltin(name));
        }
        let fragment = fragment.into();
        if name.trim().is_empty() || fragment.trim().is_empty() {
            return Err(StrategyError::Config(format!(
                "custom strategy `{name}` needs a name and a non-empty fragment"
            )));
        }
        self.custom.insert(name, fragment);
        Ok(())
    }

    pub fn resolve(&self, token: &str) -> Result<Strategy, StrategyError> {
        if let Ok(id) = token.parse::<StrategyId>() {
            return Ok(get_strategy(id));
        }
        self.custom
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case(token.trim()))
            .map(|(name, fragment)| Strategy {
                key: StrategyKey::Custom(name.clone()),
                title: Cow::Owned(name.clone()),
                fragment: Cow::Owned(fragment.clone()),
            })
            .ok_or_else(|| StrategyError::UnknownStrategy(token.to_string()))
    }

    pub fn get(&self, key: &StrategyKey) -> Result<Strategy, StrategyError> {
        self.resolve(key.name())
    }

    pub fn iter(&self) -> impl Iterator<Item = Strategy> + '_ {
        StrategyId::ALL.into_iter().map(get_strategy).chain(
            self.custom.iter().map(|(name, fragment)| Strategy {
                key: StrategyKey::Custom(name.clone()),
                title: Cow::Owned(name.clone()),
                fragment: Cow::Owned(fragment.clone()),
            }),
        )
    }
}
