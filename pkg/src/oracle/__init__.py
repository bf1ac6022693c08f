"""Independent brute-force checks of the column engine."""

from src.oracle.transport import direct_j_scan, exact_w1_tiny, w1_upper
from src.oracle.voxel import VoxelStats, compare_volumes, voxel_decompose, z_top

__all__ = [
    'VoxelStats',
    'compare_volumes',
    'direct_j_scan',
    'exact_w1_tiny',
    'voxel_decompose',
    'w1_upper',
    'z_top',
]
