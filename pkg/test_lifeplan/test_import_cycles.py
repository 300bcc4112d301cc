import pathlib
import subprocess
import sys
from unittest import TestCase

import lifeplan


class TestImportCycles(TestCase):
    """
    Imports every module of the package in a fresh interpreter. A module that only imports
    successfully after some other module has already been loaded (because of a cycle or a delayed
    import) fails here even though it would pass in a normal test run.
    """

    def test_import_cycles(self):
        package_dir = pathlib.Path(lifeplan.__file__).resolve().parent
        root = package_dir.parent
        module_count = 0
        for path in sorted(package_dir.rglob('*.py')):
            if '__pycache__' in path.parts:
                continue
            parts = list(path.relative_to(root).with_suffix('').parts)
            if parts[-1] == '__init__':
                parts.pop()
            elif parts[-1] == '__main__':
                # Importing __main__ runs the command line.
                continue
            for identifier in parts:
                self.assertTrue(identifier.isidentifier(),
                                "%s is not a valid Python identifier." % identifier)
            module_name = '.'.join(parts)
            result = subprocess.call([sys.executable, '-c', 'import %s' % module_name],
                                     cwd=str(root))
            self.assertFalse(result, "Import of %s failed." % module_name)
            module_count += 1
        self.assertGreater(module_count, 10, "Expected to find the package modules.")
