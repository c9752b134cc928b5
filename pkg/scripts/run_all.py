"""
Master script to run the full GSDNet pipeline: generate -> train -> eval -> compare
"""
import sys
from pathlib import Path
import time
import subprocess

# Add project root to path
SCRIPT_DIR = Path(__file__).parent if '__file__' in globals() else Path.cwd()
PROJECT_ROOT = SCRIPT_DIR.parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.utils import setup_logger

logger = setup_logger()


def run_command(args: list, description: str) -> bool:
    """
    Run one CLI subcommand as a subprocess and return success status

    Args:
        args: Arguments after `python -m src.cli`
        description: Human-readable description

    Returns:
        True if successful, False otherwise
    """
    logger.info("=" * 70)
    logger.info(f"RUNNING: {description}")
    logger.info("=" * 70)

    try:
        result = subprocess.run(
            [sys.executable, "-m", "src.cli", *args],
            cwd=str(PROJECT_ROOT),
            capture_output=False,
            text=True
        )

        if result.returncode == 0:
            logger.info(f"[SUCCESS] {description}")
            return True
        logger.error(f"[FAILED] {description} (exit code: {result.returncode})")
        return False

    except OSError as e:
        logger.error(f"[ERROR] Could not start subprocess: {e}")
        return False


def main():
    """
    Run every pipeline step in sequence; extra arguments (e.g. --config run.json
    --out runs/demo) are passed to each step
    """
    extra = sys.argv[1:]

    logger.info("=" * 70)
    logger.info("GSDNET - FULL PIPELINE EXECUTION")
    logger.info("=" * 70)

    pipeline_start = time.time()

    steps = [
        (["generate", *extra], "Step 1: Synthetic dataset generation"),
        (["train", *extra], "Step 2: Joint training"),
        (["eval", *extra], "Step 3: Fixed-pattern evaluation"),
        (["eval", *extra, "--set", "eval.mode=random-rate"], "Step 4: Missing-rate sweep"),
        (["compare", *extra], "Step 5: Adjacency vs spectral noising"),
    ]

    results = {}
    for args, description in steps:
        success = run_command(args, description)
        results[description] = success
        if not success:
            logger.error(f"[FAILED] Pipeline failed at: {description}")
            break

    pipeline_elapsed = time.time() - pipeline_start

    logger.info("=" * 70)
    logger.info("PIPELINE SUMMARY")
    logger.info("=" * 70)
    for step, success in results.items():
        status = "[SUCCESS]" if success else "[FAILED]"
        logger.info(f"{status}: {step}")
    logger.info(f"[TIME] Total pipeline time: {pipeline_elapsed / 60:.1f} minutes")

    if len(results) == len(steps) and all(results.values()):
        logger.info("[COMPLETE] PIPELINE COMPLETED SUCCESSFULLY!")
    else:
        logger.error("[FAILED] PIPELINE FAILED")
        sys.exit(1)


if __name__ == "__main__":
    main()
