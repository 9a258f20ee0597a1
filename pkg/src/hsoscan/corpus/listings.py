"""Bundled hand-encoded listings and the verdicts they are expected to produce."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

# stem -> (verdict, category); category is the trigger category for
# suspicious findings and the whitelist category for conventional ones
EXPECTED = {
    "listing1": ("Suspicious", "PackageManager"),
    "listing2_sdk": ("Conventional", "SdkVersion"),
    "listing2_ui": ("Conventional", "UserInterface"),
    "listing2_file": ("Conventional", "File"),
    "listing2_permission": ("Conventional", "Permission"),
    "listing2_network": ("Conventional", "Network"),
    "listing2_intent": ("Conventional", "Intent"),
    "listing2_sharedprefs": ("Conventional", "SharedPreferences"),
    "listing3_time": ("Suspicious", "Time"),
    "listing4_sysprops": ("Suspicious", "SystemProperties"),
    "listing5_sms": ("Suspicious", "SMS"),
    "listing6_location": ("Suspicious", "Location"),
    "listing7_pkgmgr": ("Suspicious", "PackageManager"),
    "listing8_misc": ("Suspicious", "Miscellaneous"),
}

# listing 1 with one extra extended-source API concatenated into the SMS payload
EXTENDED_VARIANTS = ("listing1_wifi", "listing1_tasks", "listing1_cell")


def listings_dir() -> Path:
    return Path(str(resources.files("hsoscan") / "data" / "listings"))


def listing_path(stem: str) -> Path:
    p = listings_dir() / f"{stem}.ir"
    if not p.is_file():
        raise KeyError(stem)
    return p


def listing_text(stem: str) -> str:
    return listing_path(stem).read_text(encoding="utf-8")


def all_listings() -> list:
    return sorted(p.stem for p in listings_dir().glob("*.ir"))
