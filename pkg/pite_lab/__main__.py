import sys

from pite_lab.main import main

sys.exit(main())
