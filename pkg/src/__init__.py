# ferrozx - src package
