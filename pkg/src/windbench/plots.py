"""Figure rendering; every plot gets a sidecar CSV with the plotted values."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import timeutil
from .errors import ValidationError
from .formats import format_power
from .prep import RegionCrop
from .types import PowerSeries

WEEK_HOURS = 168


def default_week_start(test_start_hour: int, test_end_hour: int) -> int:
    """First Monday 00:00 UTC with a full week inside the test period."""
    hour = int(test_start_hour)
    while ((hour // 24) + 3) % 7 != 0 or hour % 24 != 0:  # 1970-01-01 was a Thursday
        hour += 1
    if hour + WEEK_HOURS > test_end_hour:
        hour = test_start_hour
    if hour + WEEK_HOURS > test_end_hour:
        raise ValidationError("test period shorter than one week")
    return hour


def render_weekly_plot(
    truth: PowerSeries,
    forecasts: dict[str, PowerSeries],
    week_start_hour: int,
    png_path: str | Path,
    csv_path: str | Path,
) -> None:
    """One panel per model: ground truth dotted, forecast solid, one week."""
    if not forecasts:
        raise ValidationError("no forecasts to plot")
    end = week_start_hour + WEEK_HOURS
    try:
        truth_week = truth.slice_hours(week_start_hour, end)
        model_weeks = {m: s.slice_hours(week_start_hour, end) for m, s in forecasts.items()}
    except ValidationError:
        raise ValidationError(
            f"week starting {timeutil.format_iso_hour(week_start_hour)} not fully "
            "inside the forecast period"
        ) from None

    models = list(model_weeks)
    hours = np.arange(WEEK_HOURS)
    fig, axes = plt.subplots(
        len(models), 1, figsize=(10.0, 2.2 * len(models)), sharex=True, squeeze=False
    )
    for ax, model in zip(axes[:, 0], models):
        ax.plot(hours, truth_week.power_mw, "k:", linewidth=1.2, label="ground truth")
        ax.plot(hours, model_weeks[model].power_mw, linewidth=1.2, label=model)
        ax.set_ylabel("MW")
        ax.legend(loc="upper right", fontsize=8)
        ax.grid(alpha=0.3)
    axes[-1, 0].set_xlabel(
        f"hours from {timeutil.format_iso_hour(week_start_hour)}"
    )
    fig.suptitle("Weekly forecasts vs ground truth")
    fig.tight_layout()
    fig.savefig(png_path, dpi=130)
    plt.close(fig)

    lines = ["timestamp,truth," + ",".join(models)]
    for i in range(WEEK_HOURS):
        values = [format_power(float(model_weeks[m].power_mw[i])) for m in models]
        lines.append(
            f"{timeutil.format_iso_hour(week_start_hour + i)},"
            f"{format_power(float(truth_week.power_mw[i]))},"
            + ",".join(values)
        )
    Path(csv_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def render_region_geometry(crop: RegionCrop, png_path: str | Path) -> None:
    """Hull, mask, and farm locations over the mean wind map of the crop."""
    fig, ax = plt.subplots(figsize=(5, 5))
    mean_map = crop.maps.values.mean(axis=0)
    extent = (crop.col0 - 0.5, crop.col1 + 0.5, crop.row1 + 0.5, crop.row0 - 0.5)
    ax.imshow(mean_map, extent=extent, cmap="viridis")
    mask_rows, mask_cols = np.nonzero(crop.mask)
    ax.scatter(mask_cols + crop.col0, mask_rows + crop.row0, s=8, c="white", alpha=0.5,
               label="hull cells")
    hull_x = [p[0] for p in crop.hull] + [crop.hull[0][0]]
    hull_y = [p[1] for p in crop.hull] + [crop.hull[0][1]]
    ax.plot(hull_x, hull_y, "w-", linewidth=1.0)
    ax.scatter([f.x for f in crop.farms], [f.y for f in crop.farms], marker="x", c="red",
               s=48, label="farms")
    ax.set_title(f"region {crop.region_id}")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=130)
    plt.close(fig)
