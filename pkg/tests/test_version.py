import unittest

from src import ostrovskywaves as ow


class TestVersion(unittest.TestCase):
    def test_fromString(self):
        self.assertEqual(ow.Version.fromString('1.2.3'), ow.Version(1, 2, 3))
        self.assertEqual(ow.Version.fromString(' 0.10.0-rc.1 '), ow.Version(0, 10, 0, 'rc.1'))

        for string in ('1.2', 'a.b.c', '1.2.3-', '-1.2.3'):
            with self.assertRaises(ValueError):
                ow.Version.fromString(string)

    def test_str(self):
        self.assertEqual(str(ow.Version(1, 0, 0)), '1.0.0')
        self.assertEqual(str(ow.Version(1, 0, 0, 'dev')), '1.0.0-dev')

    def test_invalid(self):
        with self.assertRaises(ValueError):
            ow.Version(-1, 0, 0)

        with self.assertRaises(ValueError):
            ow.Version(1, 0, 0, '')

    def test_ordering(self):
        self.assertLess(ow.Version(1, 0, 0), ow.Version(1, 0, 1))
        self.assertLess(ow.Version(1, 9, 9), ow.Version(2, 0, 0))

    def test_producer(self):
        self.assertEqual(ow.Version(1, 2, 3).producer, 'ostrovskywaves 1.2.3')
        self.assertEqual(ow.Version.fromProducer('ostrovskywaves 1.2.3'), ow.Version(1, 2, 3))

        with self.assertRaises(ow.IncompatibleArtifactError):
            ow.Version.fromProducer('databases 1.2.3')

    def test_compatibility(self):
        ow.Version(1, 0, 0).checkCompatible(ow.Version(1, 4, 2))

        with self.assertRaises(ow.IncompatibleArtifactError):
            ow.Version(1, 0, 0).checkCompatible(ow.Version(2, 0, 0))

    def test_packageVersion(self):
        self.assertIs(ow.version, ow.CURRENT_VERSION)


if __name__ == '__main__':
    unittest.main()
