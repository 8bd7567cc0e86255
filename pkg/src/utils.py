import sys
from typing import List

from src.objects.record import format_float
from src.plumbing import csv_text, dump_json


def print_json(obj):
    sys.stdout.write(dump_json(obj))


def print_table(header, rows):
    sys.stdout.write(csv_text(header, ([format_float(v) for v in row] for row in rows)))


def parse_float_list(text: str) -> List[float]:
    # "1e-2,1e-3, 1e-4"
    return [float(item) for item in text.split(",") if item.strip()]
