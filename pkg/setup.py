#!/usr/bin/env python3
"""
Setup script for the semigeostrophic free-surface solver.
Creates the data directories and a .env file on a fresh machine.
"""

import sys
from pathlib import Path

from src.config import CONFIGS_DIR, RUNS_DIR, EnvironmentConfig, ensure_directories


def create_directories():
    """Create the default run and config directories."""
    ensure_directories()
    for directory in (RUNS_DIR, CONFIGS_DIR):
        print(f"✅ Created directory: {directory}")


def create_env_template():
    """Create .env from the documented SGFB_ defaults if it doesn't exist."""
    env_path = Path(".env")
    if env_path.exists():
        print("✅ .env file already exists")
        return

    lines = ["# Semigeostrophic free-surface solver configuration", ""]
    for name, spec in EnvironmentConfig.OPTIONAL_VARS.items():
        lines.append(f"# {spec['description']}")
        lines.append(f"{name}={spec['default']}")
        lines.append("")
    env_path.write_text("\n".join(lines))
    print("✅ Created .env file with defaults")


def main():
    """Main setup function."""
    print("🚀 Setting up the free-surface solver...")
    print()

    if not Path("pyproject.toml").exists():
        print("❌ Please run this script from the project root directory")
        sys.exit(1)

    print("📁 Creating directories...")
    create_directories()
    print()

    print("⚙️  Setting up configuration...")
    create_env_template()
    valid, result = EnvironmentConfig.validate_environment()
    if not valid:
        for error in result['errors']:
            print(f"  • {error}")
        print("\n❌ Setup failed - invalid environment")
        sys.exit(1)
    print()

    print("✨ Setup completed successfully!")
    print()
    print("🎯 Next steps:")
    print("1. Install dependencies: uv sync")
    print("2. Run tests: uv run pytest tests/ -m 'not slow'")
    print("3. Solve the static problem: uv run sgfb dual-solve --config data/configs/single_dirac.json")
    print()
    print("📚 For more information, see README.md")


if __name__ == "__main__":
    main()
