# Tracks leading into a train station.
# States: s0..s6 = 0..6, platform p1 = 7, the blocked platform = 8.
# Alice switches s0,s1; Bob s2,s3; Charlie s4,s5,s6.
ts v1 states=9 init=0
bad 8
edge 0 1 go
edge 0 2 go
edge 1 3 go
edge 1 4 go
edge 1 7 go
edge 2 3 go
edge 2 6 go
edge 3 4 go
edge 3 5 go
edge 4 7 go
edge 4 8 go
edge 5 6 go
edge 5 8 go
edge 6 8 go
actor A 0 1
actor B 2 3
actor C 4 5 6
aux 7 8
end
