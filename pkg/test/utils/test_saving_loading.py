import os
import tempfile

import unittest
from unittest import mock

from roughsurf.utils import SavableLoadable


@mock.patch.multiple(SavableLoadable, __abstractmethods__=frozenset())
class TestSavableLoadable(unittest.TestCase):

    def test_with_extension_appended(self):
        class _Dataset(SavableLoadable):
            file_extension = '.dataset.json'
        self.assertEqual('run/data.dataset.json', _Dataset.with_extension('run/data'))

    def test_with_extension_kept_for_json(self):
        class _Dataset(SavableLoadable):
            file_extension = '.dataset.json'
        self.assertEqual('run/data.json', _Dataset.with_extension('run/data.json'))

    def test_prep_save_file_dirs_created(self):
        # arrange
        with tempfile.TemporaryDirectory() as temp_dir:
            dirname = os.path.join(temp_dir, 'dir1')
            specified_save_path = os.path.join(dirname, 'file.txt')
            # act
            SavableLoadable.prep_save_file(specified_save_path, interrupted=False)
            # assert
            self.assertTrue(os.path.isdir(dirname), msg='Intermediate directories should get created')

    def test_prep_save_file_name_normal(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            specified_save_path = os.path.join(temp_dir, 'dir1', 'file.txt')
            actual_save_path = SavableLoadable.prep_save_file(specified_save_path, interrupted=False)
            self.assertEqual('file.txt', os.path.split(actual_save_path)[1],
                             msg='Filename should be exactly the same as specified')

    def test_prep_save_file_name_interrupted(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            specified_save_path = os.path.join(temp_dir, 'dir1', 'file.txt')
            actual_save_path = SavableLoadable.prep_save_file(specified_save_path, interrupted=True)
            self.assertEqual('backup_file.txt', os.path.split(actual_save_path)[1],
                             msg='Interrupted saves should be prefixed with "backup_"')

    def test_prep_save_file_bare_name(self):
        """A path without a directory part should not try to create directories"""
        self.assertEqual('file.txt', SavableLoadable.prep_save_file('file.txt', interrupted=False))


if __name__ == '__main__':
    unittest.main()
