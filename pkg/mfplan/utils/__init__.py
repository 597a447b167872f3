from mfplan.utils.utils import config_hash, file_sha256, parse_float_list, write_csv, to_jsonable

__all__ = ('config_hash', 'file_sha256', 'parse_float_list', 'write_csv', 'to_jsonable')
